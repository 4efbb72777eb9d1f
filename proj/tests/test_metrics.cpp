#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "fedsim/metrics.hpp"
#include "fedsim/rng.hpp"
#include "test_util.hpp"

using namespace fedsim;

namespace {

RoundRecord rec(int round, double acc) {
    RoundRecord r;
    r.round = round;
    r.test_accuracy = acc;
    return r;
}

}  // namespace

TEST_CASE("run summary picks peak and final", "[metrics]") {
    const auto s = summarize_run({rec(1, 0.1), rec(2, 0.5), rec(3, 0.3)});
    CHECK(s.peak_accuracy == 0.5);
    CHECK(s.peak_round == 2);
    CHECK(s.final_accuracy == 0.3);

    const auto mono = summarize_run({rec(1, 0.1), rec(2, 0.2), rec(3, 0.4)});
    CHECK(mono.peak_accuracy == mono.final_accuracy);
    CHECK(mono.peak_round == 3);

    const auto flat = summarize_run({rec(1, 0.2), rec(2, 0.2), rec(3, 0.2)});
    CHECK(flat.peak_round == 1);  // earliest round on ties

    CHECK_THROWS_AS(summarize_run({}), config_error);
}

TEST_CASE("seed aggregation uses sample standard deviation", "[metrics]") {
    RunSummary a, b;
    a.peak_accuracy = 0.5;
    b.peak_accuracy = 0.7;
    a.final_accuracy = b.final_accuracy = 0.6;
    a.peak_round = b.peak_round = 10;
    const auto stats = aggregate_seeds({a, b});
    CHECK(stats.peak_accuracy.mean == Catch::Approx(0.6));
    CHECK(stats.peak_accuracy.std == Catch::Approx(0.1414213562).epsilon(1e-6));
    CHECK(stats.final_accuracy.std == 0.0);

    RunSummary c = a;
    const auto same = aggregate_seeds({c, c, c, c, c});
    CHECK(same.peak_accuracy.std == 0.0);
    CHECK(same.peak_accuracy.mean == 0.5);

    CHECK_THROWS_AS(aggregate_seeds({a}), config_error);
}

TEST_CASE("round csv round-trips losslessly", "[metrics]") {
    std::vector<RoundRecord> records;
    RngStream rng(8);
    for (int r = 1; r <= 25; ++r) {
        RoundRecord rr;
        rr.round = r;
        rr.test_accuracy = rng.uniform();
        rr.num_active_start = static_cast<int>(rng.uniform_below(50));
        rr.num_participating = static_cast<int>(rng.uniform_below(50));
        rr.num_completed = static_cast<int>(rng.uniform_below(50));
        rr.mean_eta = rng.uniform();
        rr.total_energy_remaining = rng.normal(0.0, 100.0);
        records.push_back(rr);
    }
    const auto path = write_file("rounds.csv", "");
    write_round_csv(records, path);
    CHECK(read_round_csv(path) == records);

    // identical inputs -> identical bytes
    const auto bytes1 = read_file(path);
    write_round_csv(records, path);
    CHECK(read_file(path) == bytes1);
}

TEST_CASE("empty record list writes a header-only csv", "[metrics]") {
    const auto path = write_file("empty_rounds.csv", "");
    write_round_csv({}, path);
    CHECK(read_file(path) == std::string(kRoundCsvHeader) + "\n");
    CHECK(read_round_csv(path).empty());
}

TEST_CASE("depletion csv keeps survivors as empty fields", "[metrics]") {
    const std::vector<DepletionRecord> records = {{0, 17}, {1, std::nullopt}, {2, 200}};
    const auto path = write_file("depletion.csv", "");
    write_depletion_csv(records, path);
    CHECK(read_file(path) == "client_id,depletion_round\n0,17\n1,\n2,200\n");
    CHECK(read_depletion_csv(path) == records);
}

TEST_CASE("summary json layout and byte stability", "[metrics]") {
    RunSummary a, b;
    a.seed = 1;
    a.peak_accuracy = 0.5;
    a.peak_round = 3;
    a.final_accuracy = 0.4;
    b.seed = 2;
    b.peak_accuracy = 0.7;
    b.peak_round = 9;
    b.final_accuracy = 0.7;
    const json config = {{"name", "unit"}, {"lambda", 0.5}};

    const auto doc = summary_to_json(config, {a, b});
    CHECK(doc["config"]["lambda"] == 0.5);
    CHECK(doc["seeds"].size() == 2);
    CHECK(doc["seeds"][0]["seed"] == 1);
    CHECK(doc["seeds"][1]["peak_round"] == 9);
    CHECK(doc["mean"]["peak_accuracy"] == Catch::Approx(0.6));
    CHECK(doc["std"]["final_accuracy"].get<double>() > 0.0);

    const auto path = write_file("summary.json", "");
    write_summary_json(config, {a, b}, path);
    const auto bytes1 = read_file(path);
    write_summary_json(config, {a, b}, path);
    CHECK(read_file(path) == bytes1);
    CHECK(json::parse(bytes1) == doc);

    const auto single = summary_to_json(config, {a});
    CHECK(single["std"]["peak_accuracy"].is_null());
    CHECK(single["mean"]["peak_accuracy"] == 0.5);
}

TEST_CASE("quartiles use Tukey hinges", "[metrics]") {
    const auto q = compute_quartiles({1, 2, 3, 4, 5});
    CHECK(q.min == 1.0);
    CHECK(q.q1 == 2.0);
    CHECK(q.median == 3.0);
    CHECK(q.q3 == 4.0);
    CHECK(q.max == 5.0);

    const auto even = compute_quartiles({4, 1, 3, 2});
    CHECK(even.median == 2.5);
    CHECK(even.q1 == 1.5);
    CHECK(even.q3 == 3.5);

    const auto one = compute_quartiles({7});
    CHECK(one.min == 7.0);
    CHECK(one.median == 7.0);
    CHECK(one.max == 7.0);

    CHECK_THROWS_AS(compute_quartiles({}), config_error);
}
