#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "test_util.hpp"

using namespace fedsim;

static std::vector<int> class_counts(const Dataset& ds) {
    std::vector<int> counts(ds.num_classes, 0);
    for (int y : ds.labels) counts[y] += 1;
    return counts;
}

TEST_CASE("synthetic generator balances labels to within one", "[dataset]") {
    const auto [train, test] = generate_synthetic(2, 2, 4, 2, 10.0, 0);
    CHECK(train.size() == 4);
    CHECK(test.size() == 2);
    CHECK(class_counts(train) == std::vector<int>{2, 2});
    CHECK(class_counts(test) == std::vector<int>{1, 1});
    train.validate();
    test.validate();

    const auto [tr7, te7] = generate_synthetic(3, 4, 7, 5, 1.0, 9);
    CHECK(class_counts(tr7) == std::vector<int>{3, 2, 2});
    CHECK(class_counts(te7) == std::vector<int>{2, 2, 1});
}

TEST_CASE("synthetic generator is deterministic in the seed", "[dataset]") {
    const auto a = generate_synthetic(3, 5, 100, 20, 2.0, 1234);
    const auto b = generate_synthetic(3, 5, 100, 20, 2.0, 1234);
    CHECK(a.first.features == b.first.features);
    CHECK(a.first.labels == b.first.labels);
    CHECK(a.second.features == b.second.features);
    CHECK(a.second.labels == b.second.labels);

    const auto c = generate_synthetic(3, 5, 100, 20, 2.0, 1235);
    CHECK(a.first.features != c.first.features);
}

TEST_CASE("synthetic generator rejects invalid sizes", "[dataset]") {
    CHECK_THROWS_AS(generate_synthetic(1, 2, 10, 5, 1.0, 0), config_error);
    CHECK_THROWS_AS(generate_synthetic(2, 1, 10, 5, 1.0, 0), config_error);
    CHECK_THROWS_AS(generate_synthetic(2, 2, 0, 5, 1.0, 0), config_error);
    CHECK_THROWS_AS(generate_synthetic(2, 2, 10, 5, 0.0, 0), config_error);
}

// Oracle for the default task difficulty: a centrally trained softmax model
// must separate the blobs almost perfectly at separation 3.
TEST_CASE("centralized training on synthetic data reaches 0.95 accuracy", "[dataset][oracle]") {
    const auto [train, test] = generate_synthetic(3, 5, 3000, 600, 3.0, 1);
    TrainConfig tc;
    ModelParams params = init_params(train.num_classes, train.dim);
    RngStream rng(derive_seed(1, "central"));
    for (int epoch = 0; epoch < 30; ++epoch)
        params = sgd_epoch(std::move(params), train.features.data(), train.labels.data(), train.size(),
                           tc, rng);
    CHECK(evaluate(params, test) >= 0.95);
}

TEST_CASE("csv loader remaps labels preserving sorted order", "[dataset]") {
    const auto path = write_file("basic.csv", "0.0,1.0,7\n1.0,0.0,9\n");
    const Dataset ds = load_csv(path);
    CHECK(ds.size() == 2);
    CHECK(ds.dim == 2);
    CHECK(ds.num_classes == 2);
    CHECK(ds.labels == std::vector<int>{0, 1});
    CHECK(ds.features == std::vector<double>{0.0, 1.0, 1.0, 0.0});
}

TEST_CASE("csv loader auto-detects a header row", "[dataset]") {
    const auto path = write_file("header.csv", "f1,f2,label\n0.0,1.0,7\n1.0,0.0,9\n");
    const Dataset ds = load_csv(path);
    CHECK(ds.size() == 2);
    CHECK(ds.labels == std::vector<int>{0, 1});
}

TEST_CASE("csv loader reports ragged rows with line numbers", "[dataset]") {
    const auto path = write_file("ragged.csv", "0.0,1.0\n0.0,1.0,2.0,3\n");
    try {
        load_csv(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("csv loader rejects empty and non-numeric input", "[dataset]") {
    CHECK_THROWS_AS(load_csv(write_file("empty.csv", "")), parse_error);
    CHECK_THROWS_AS(load_csv(write_file("header_only.csv", "a,b,c\n")), parse_error);
    CHECK_THROWS_AS(load_csv(write_file("bad_field.csv", "0.0,1.0,7\n0.0,oops,9\n")), parse_error);
    CHECK_THROWS_AS(load_csv("/nonexistent/path.csv"), io_error);
    try {
        load_csv(write_file("bad_field.csv", "0.0,1.0,7\n0.0,oops,9\n"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
    }
}
