#include <doctest.h>

#include <random>
#include <sstream>

#include "rankmerge/errors.hpp"
#include "rankmerge/experiments.hpp"
#include "rankmerge/io.hpp"
#include "test_util.hpp"

using namespace rankmerge;

namespace {

SynthOutput small_synth(std::uint64_t seed = 11, std::size_t d = 40, int n = 12, int n_m = 2) {
    SynthSpec spec;
    spec.d = d;
    spec.n = n;
    spec.n_m = n_m;
    spec.mrr_fidelity = 0.7;
    spec.ndcg_fidelity = 0.9;
    spec.seed = seed;
    return generate_synthetic(spec);
}

EnsembleConfig config_for(const SynthOutput& synth) {
    EnsembleConfig config;
    for (const auto& run : synth.runs.runs()) {
        if (run.model_id() != "ndcg") config.mrr_model_ids.push_back(run.model_id());
    }
    config.primary_mrr_model = config.mrr_model_ids.front();
    config.ndcg_model_id = "ndcg";
    return config;
}

} // namespace

TEST_CASE("run_ablation emits the 7 toggle rows in the fixed order") {
    SynthOutput synth = small_synth();
    EnsembleConfig base = config_for(synth);
    std::vector<AblationRow> rows = run_ablation(synth.dataset, synth.runs, base);
    REQUIRE(rows.size() == 7);

    const bool expected[7][3] = {{true, false, false}, {false, true, false}, {false, false, true},
                                 {false, true, true},  {true, false, true},  {true, true, false},
                                 {true, true, true}};
    for (int i = 0; i < 7; ++i) {
        CHECK(rows[static_cast<std::size_t>(i)].enable_h == expected[i][0]);
        CHECK(rows[static_cast<std::size_t>(i)].enable_t == expected[i][1]);
        CHECK(rows[static_cast<std::size_t>(i)].enable_n == expected[i][2]);
        REQUIRE(rows[static_cast<std::size_t>(i)].report.avg_mrr_set_size.has_value());
    }

    // union superset law: the all-on row dominates every single-subset row
    double all_on = *rows[6].report.avg_mrr_set_size;
    CHECK(all_on >= *rows[0].report.avg_mrr_set_size);
    CHECK(all_on >= *rows[1].report.avg_mrr_set_size);
    CHECK(all_on >= *rows[2].report.avg_mrr_set_size);
}

TEST_CASE("T-only ablation with rho_t=1 and one model keeps exactly one candidate") {
    SynthOutput synth = small_synth(12, 25, 8, 1);
    EnsembleConfig base = config_for(synth);
    base.rho_t = 1;
    std::vector<AblationRow> rows = run_ablation(synth.dataset, synth.runs, base);
    CHECK(*rows[1].report.avg_mrr_set_size == doctest::Approx(1.0));
}

TEST_CASE("run_sweep produces one row per value and an objective argmax") {
    SynthOutput synth = small_synth();
    SweepSpec spec;
    spec.parameter = SweepParameter::rho_h;
    spec.values = {0, 1, 2, 3};
    spec.base_config = config_for(synth);
    SweepResult result = run_sweep(synth.dataset, synth.runs, spec);
    REQUIRE(result.rows.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(result.rows[i].value == doctest::Approx(double(i)));

    SUBCASE("objective (1,0) maximizes MRR") {
        spec.w_mrr = 1.0;
        spec.w_ndcg = 0.0;
        SweepResult by_mrr = run_sweep(synth.dataset, synth.runs, spec);
        for (const auto& row : by_mrr.rows) {
            CHECK(by_mrr.rows[by_mrr.best_index].report.mrr >= row.report.mrr);
        }
    }
}

TEST_CASE("alpha sweep endpoints match the single models") {
    SynthOutput synth = small_synth();
    EnsembleConfig base = config_for(synth);

    SweepSpec spec;
    spec.parameter = SweepParameter::alpha;
    spec.values = {0.0, 1.0};
    spec.base_config = base;
    SweepResult result = run_sweep(synth.dataset, synth.runs, spec);
    REQUIRE(result.rows.size() == 2);

    auto single_model_report = [&](const std::string& id) {
        std::vector<RankVector> rankings;
        for (const auto& q : synth.dataset.questions()) {
            rankings.push_back(synth.runs.get(id).ranks(q.question_id));
        }
        return evaluate(rankings, synth.dataset);
    };
    MetricsReport mrr_alone = single_model_report(base.primary_mrr_model);
    MetricsReport ndcg_alone = single_model_report("ndcg");

    CHECK(result.rows[1].report.mrr == mrr_alone.mrr);
    CHECK(*result.rows[1].report.ndcg == *mrr_alone.ndcg);
    CHECK(result.rows[0].report.mrr == ndcg_alone.mrr);
    CHECK(*result.rows[0].report.ndcg == *ndcg_alone.ndcg);
}

TEST_CASE("sweep spec validation") {
    SynthOutput synth = small_synth();
    SweepSpec spec;
    spec.base_config = config_for(synth);
    spec.parameter = SweepParameter::rho_h;
    spec.values = {};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("non-empty"), ValidationError);
    spec.values = {2, 1};
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("strictly increasing"),
                         ValidationError);
    spec.values = {1, 2};
    spec.w_mrr = 0.0;
    spec.w_ndcg = 0.0;
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("sum to > 0"), ValidationError);
    spec.w_ndcg = 1.0;
    CHECK_NOTHROW(spec.validate());
    // fractional rho is rejected when applied
    spec.values = {0.5, 1.0};
    CHECK_THROWS_WITH_AS(run_sweep(synth.dataset, synth.runs, spec),
                         doctest::Contains("nonnegative integer required"), ValidationError);
}

TEST_CASE("provenance_report shape") {
    RunSet runs;
    runs.add(ModelRun::from_ranks("m1", {{"q1", {1, 2, 3, 4}}}));
    runs.add(ModelRun::from_ranks("m2", {{"q1", {2, 1, 3, 4}}}));
    runs.add(ModelRun::from_ranks("ndcg", {{"q1", {4, 3, 1, 2}}}));
    EnsembleConfig config;
    config.mrr_model_ids = {"m1", "m2"};
    config.primary_mrr_model = "m1";
    config.ndcg_model_id = "ndcg";
    config.rho_h = 2;
    config.rho_t = 1;
    config.rho_nn = 0;

    std::vector<QuestionRecord> qs(1);
    qs[0].question_id = "q1";
    qs[0].candidate_count = 4;
    qs[0].gt_index = 0;
    qs[0].candidates = std::vector<std::string>{"red", "green", "blue", "white"};
    Dataset ds(std::move(qs));

    std::string listing = provenance_report(ds, runs, config, {"q1"}, 2);
    CHECK(listing.find("question: q1") != std::string::npos);
    CHECK(listing.find("mrr candidate set") != std::string::npos);
    CHECK(listing.find("[H] #0 red") != std::string::npos);
    CHECK(listing.find("next 2 ndcg candidates") != std::string::npos);
    CHECK(listing.find("3. #2 blue") != std::string::npos);

    SUBCASE("empty first step lists only the remainder block") {
        config.enable_h = config.enable_t = config.enable_n = false;
        std::string remainder_only = provenance_report(ds, runs, config, {"q1"}, 3);
        CHECK(remainder_only.find("mrr candidate set") == std::string::npos);
        CHECK(remainder_only.find("next 3 ndcg candidates") != std::string::npos);
    }

    SUBCASE("candidate in every subset is tagged H") {
        config.rho_nn = 4;
        config.rho_nm = 4;
        std::string all_tagged = provenance_report(ds, runs, config, {"q1"}, 0);
        CHECK(all_tagged.find("[H] #0 red") != std::string::npos);
    }
}

TEST_CASE("generate_synthetic is deterministic and honors fidelity endpoints") {
    SUBCASE("same spec twice gives identical serialized bytes") {
        SynthOutput a = small_synth(99);
        SynthOutput b = small_synth(99);
        std::ostringstream sa, sb;
        serialize_dataset(a.dataset, sa);
        serialize_dataset(b.dataset, sb);
        CHECK(sa.str() == sb.str());
        for (std::size_t i = 0; i < a.runs.size(); ++i) {
            std::ostringstream ra, rb;
            serialize_run(a.runs.runs()[i], ra);
            serialize_run(b.runs.runs()[i], rb);
            CHECK(ra.str() == rb.str());
        }
    }

    SUBCASE("mrr_fidelity=1 makes every reciprocal-rank run perfect") {
        SynthSpec spec{30, 10, 2, 1.0, 0.5, 7};
        SynthOutput synth = generate_synthetic(spec);
        for (const auto& run : synth.runs.runs()) {
            if (run.model_id() == "ndcg") continue;
            std::vector<RankVector> rankings;
            for (const auto& q : synth.dataset.questions()) {
                rankings.push_back(run.ranks(q.question_id));
            }
            MetricsReport report = evaluate(rankings, synth.dataset);
            CHECK(report.mrr == 1.0);
        }
    }

    SUBCASE("ndcg_fidelity=1 makes the gain run ideal") {
        SynthSpec spec{30, 10, 1, 0.5, 1.0, 7};
        SynthOutput synth = generate_synthetic(spec);
        std::vector<RankVector> rankings;
        for (const auto& q : synth.dataset.questions()) {
            rankings.push_back(synth.runs.get("ndcg").ranks(q.question_id));
        }
        MetricsReport report = evaluate(rankings, synth.dataset);
        REQUIRE(report.ndcg.has_value());
        CHECK(*report.ndcg == 1.0);
    }
}

TEST_CASE("synth spec validation") {
    SynthSpec spec{0, 10, 1, 0.5, 0.5, 1};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.d = 1;
    spec.mrr_fidelity = 1.5;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.mrr_fidelity = 0.5;
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("sweep and ablation results are reproducible") {
    SynthOutput synth = small_synth(21);
    EnsembleConfig base = config_for(synth);
    SweepSpec spec;
    spec.parameter = SweepParameter::rho_t;
    spec.values = {0, 1, 2};
    spec.base_config = base;

    std::ostringstream a, b;
    write_sweep_csv(run_sweep(synth.dataset, synth.runs, spec, 1), a);
    write_sweep_csv(run_sweep(synth.dataset, synth.runs, spec, 2), b);
    CHECK(a.str() == b.str()); // thread count cannot change the table

    std::ostringstream c, d;
    write_ablation_csv(run_ablation(synth.dataset, synth.runs, base, 1), c);
    write_ablation_csv(run_ablation(synth.dataset, synth.runs, base, 2), d);
    CHECK(c.str() == d.str());
}
