#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rankmerge/ensemble.hpp"
#include "rankmerge/errors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace rankmerge;

namespace {

// Two reciprocal-rank models + one gain model over a single 3-candidate
// question: a=0, b=1, c=2 with ranks a:(1,2), b:(2,1), c:(3,3).
struct SmallFixture {
    RunSet runs;
    EnsembleConfig config;

    SmallFixture() {
        runs.add(ModelRun::from_ranks("m1", {{"q1", {1, 2, 3}}}));
        runs.add(ModelRun::from_ranks("m2", {{"q1", {2, 1, 3}}}));
        runs.add(ModelRun::from_ranks("ndcg", {{"q1", {3, 1, 2}}}));
        config.mrr_model_ids = {"m1", "m2"};
        config.primary_mrr_model = "m1";
        config.ndcg_model_id = "ndcg";
    }
};

} // namespace

TEST_CASE("high_certainty_set is the intersection of top prefixes") {
    SmallFixture f;
    f.config.rho_h = 2;
    CHECK(high_certainty_set(f.runs, f.config, "q1") == std::vector<int>{0, 1});

    f.config.rho_h = 0;
    CHECK(high_certainty_set(f.runs, f.config, "q1").empty());

    // single model: intersection over one set is its top prefix
    EnsembleConfig single = f.config;
    single.mrr_model_ids = {"m1"};
    single.primary_mrr_model = "m1";
    single.rho_h = 3;
    CHECK(high_certainty_set(f.runs, single, "q1") == std::vector<int>{0, 1, 2});

    f.config.rho_h = 2;
    f.config.enable_h = false;
    CHECK(high_certainty_set(f.runs, f.config, "q1").empty());
}

TEST_CASE("top_answers_set is the union of first answers") {
    SmallFixture f;
    f.config.rho_t = 1;
    CHECK(top_answers_set(f.runs, f.config, "q1") == std::vector<int>{0, 1});

    f.config.rho_t = 0;
    CHECK(top_answers_set(f.runs, f.config, "q1").empty());

    // both models agree on the top answer
    RunSet agree;
    agree.add(ModelRun::from_ranks("m1", {{"q1", {1, 2, 3}}}));
    agree.add(ModelRun::from_ranks("m2", {{"q1", {1, 3, 2}}}));
    EnsembleConfig config = f.config;
    config.rho_t = 1;
    CHECK(top_answers_set(agree, config, "q1") == std::vector<int>{0});
}

TEST_CASE("ndcg_agreement_set requires agreement on both sides") {
    RunSet small;
    small.add(ModelRun::from_ranks("m1", {{"q1", {5, 1, 6, 4, 2, 3}}}));
    small.add(ModelRun::from_ranks("m2", {{"q1", {4, 5, 6, 1, 3, 2}}}));
    small.add(ModelRun::from_ranks("ndcg", {{"q1", {1, 2, 3, 4, 5, 6}}}));
    EnsembleConfig config;
    config.mrr_model_ids = {"m1", "m2"};
    config.primary_mrr_model = "m1";
    config.ndcg_model_id = "ndcg";
    config.rho_nn = 5;
    config.rho_nm = 3;
    // gain top-5 = {0,1,2,3,4}; m1 top-3 = {1,4,5}; m2 top-3 = {3,4,5}
    // agreement: {1,3,4}
    CHECK(ndcg_agreement_set(small, config, "q1") == std::vector<int>{1, 3, 4});

    config.rho_nn = 0;
    CHECK(ndcg_agreement_set(small, config, "q1").empty());

    // gain top disjoint from every reciprocal-rank top
    config.rho_nn = 2;
    config.rho_nm = 1;
    RunSet disjoint;
    disjoint.add(ModelRun::from_ranks("m1", {{"q1", {3, 4, 1, 2}}}));
    disjoint.add(ModelRun::from_ranks("m2", {{"q1", {4, 3, 2, 1}}}));
    disjoint.add(ModelRun::from_ranks("ndcg", {{"q1", {1, 2, 3, 4}}}));
    EnsembleConfig dconfig = config;
    CHECK(ndcg_agreement_set(disjoint, dconfig, "q1").empty());
}

TEST_CASE("mrr_candidate_set applies the H > T > N provenance priority") {
    SmallFixture f;
    f.config.rho_h = 2; // H = {a,b}
    f.config.rho_t = 1; // T = {a,b}
    f.config.rho_nn = 2; // gain top-2 = {b,c}
    f.config.rho_nm = 3; // every candidate in reach -> N = {b,c}
    MrrCandidateSet set = mrr_candidate_set(f.runs, f.config, "q1");
    CHECK(set.members == std::vector<int>{0, 1, 2});
    CHECK(set.tag_by_candidate[0] == Provenance::high_certainty);
    CHECK(set.tag_by_candidate[1] == Provenance::high_certainty);
    CHECK(set.tag_by_candidate[2] == Provenance::ndcg_agreement);

    SUBCASE("all subsets disabled yields the empty set") {
        f.config.enable_h = f.config.enable_t = f.config.enable_n = false;
        MrrCandidateSet empty = mrr_candidate_set(f.runs, f.config, "q1");
        CHECK(empty.members.empty());
    }
}

TEST_CASE("mrr_step_rank multiplies ranks across models") {
    SmallFixture f;
    CHECK(mrr_step_rank(f.runs, f.config, "q1", 0) == 2); // 1*2
    CHECK(mrr_step_rank(f.runs, f.config, "q1", 1) == 2); // 2*1
    CHECK(mrr_step_rank(f.runs, f.config, "q1", 2) == 9); // 3*3

    EnsembleConfig single = f.config;
    single.mrr_model_ids = {"m2"};
    single.primary_mrr_model = "m2";
    CHECK(mrr_step_rank(f.runs, single, "q1", 0) == 2);
}

TEST_CASE("mrr_step_rank reports 64-bit overflow") {
    // 40 copies of a rank vector placing the candidate at rank 3: 3^40 > 2^63
    RunSet runs;
    EnsembleConfig config;
    for (int m = 0; m < 40; ++m) {
        std::string id = "m" + std::to_string(m);
        runs.add(ModelRun::from_ranks(id, {{"q1", {3, 1, 2}}}));
        config.mrr_model_ids.push_back(id);
    }
    config.primary_mrr_model = "m0";
    config.ndcg_model_id = "m0"; // unused here
    CHECK_THROWS_AS(mrr_step_rank(runs, config, "q1", 0), std::overflow_error);
    CHECK(mrr_step_rank(runs, config, "q1", 1) == 1);
}

TEST_CASE("ndcg_step_key follows (r_n)^p * r_m") {
    RunSet runs;
    runs.add(ModelRun::from_ranks("m1", {{"q1", {3, 1, 2}}}));
    runs.add(ModelRun::from_ranks("ndcg", {{"q1", {2, 3, 1}}}));
    EnsembleConfig config;
    config.mrr_model_ids = {"m1"};
    config.primary_mrr_model = "m1";
    config.ndcg_model_id = "ndcg";

    config.p = 3.0;
    CHECK(ndcg_step_key(runs, config, "q1", 0) == doctest::Approx(24.0)); // 2^3 * 3

    config.p = 2.0;
    CHECK(ndcg_step_key(runs, config, "q1", 2) == doctest::Approx(2.0)); // 1^2 * 2

    config.p = 1.0;
    CHECK(ndcg_step_key(runs, config, "q1", 1) == doctest::Approx(3.0)); // 3 * 1
}

TEST_CASE("two_step_rank reproduces the worked 4-candidate instance") {
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
    config.p = 3.0;

    MergedRanking merged = two_step_rank(runs, config, "q1");
    CHECK(merged.order == std::vector<int>{0, 1, 2, 3});
    CHECK(merged.mrr_set_size == 2);
    CHECK(merged.provenance[0] == Provenance::high_certainty);
    CHECK(merged.provenance[1] == Provenance::high_certainty);
    CHECK(merged.provenance[2] == Provenance::remainder);
    CHECK(merged.provenance[3] == Provenance::remainder);
}

TEST_CASE("two_step_rank degenerate configurations") {
    SmallFixture f;

    SUBCASE("all subsets disabled: pure second-step ordering") {
        f.config.enable_h = f.config.enable_t = f.config.enable_n = false;
        f.config.p = 2.0;
        MergedRanking merged = two_step_rank(f.runs, f.config, "q1");
        CHECK(merged.mrr_set_size == 0);
        // keys: a: 9*1=9, b: 1*2=2, c: 4*3=12
        CHECK(merged.order == std::vector<int>{1, 0, 2});
        for (auto tag : merged.provenance) CHECK(tag == Provenance::remainder);
    }

    SUBCASE("rho_h >= n: pure rank-product ordering") {
        f.config.rho_h = 3;
        f.config.enable_t = f.config.enable_n = false;
        MergedRanking merged = two_step_rank(f.runs, f.config, "q1");
        CHECK(merged.mrr_set_size == 3);
        // products: a=2, b=2, c=9; tie a/b -> primary rank (1 vs 2)
        CHECK(merged.order == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("two_step_rank matches the transcription oracle on random instances") {
    std::mt19937_64 rng(6301);
    for (int iter = 0; iter < 300; ++iter) {
        testutil::RandomInstance inst = testutil::random_ensemble_instance(rng);
        MergedRanking got = two_step_rank(inst.runs, inst.config, inst.question_id);
        oracle::TwoStepOutput want =
            oracle::two_step(oracle::two_step_input_from(inst.runs, inst.config, inst.question_id));
        REQUIRE(got.order == want.order);
        REQUIRE(got.mrr_set_size == want.set_size);
        for (std::size_t i = 0; i < got.provenance.size(); ++i) {
            REQUIRE(provenance_tag(got.provenance[i]) == want.tags[i]);
        }
    }
}

TEST_CASE("rank-product ordering equals geometric-mean ordering") {
    std::mt19937_64 rng(6302);
    for (int iter = 0; iter < 100; ++iter) {
        int n = testutil::uniform_int(rng, 2, 8);
        int n_m = testutil::uniform_int(rng, 1, 3);
        std::vector<std::vector<int>> ranks;
        for (int m = 0; m < n_m; ++m) ranks.push_back(testutil::random_permutation_ranks(rng, n));
        std::vector<int> by_product(static_cast<std::size_t>(n));
        std::iota(by_product.begin(), by_product.end(), 0);
        std::vector<int> by_geomean = by_product;
        auto product = [&](int c) {
            double prod = 1.0;
            for (const auto& r : ranks) prod *= r[static_cast<std::size_t>(c)];
            return prod;
        };
        std::sort(by_product.begin(), by_product.end(), [&](int a, int b) {
            if (product(a) != product(b)) return product(a) < product(b);
            return a < b;
        });
        std::sort(by_geomean.begin(), by_geomean.end(), [&](int a, int b) {
            double ga = std::pow(product(a), 1.0 / n_m);
            double gb = std::pow(product(b), 1.0 / n_m);
            if (ga != gb) return ga < gb;
            return a < b;
        });
        CHECK(by_product == by_geomean);
    }
}

TEST_CASE("naive_blend endpoints and tie-break") {
    ModelRun m = ModelRun::from_scores("m", {{"q1", {1.0, 0.0}}});
    ModelRun n = ModelRun::from_scores("n", {{"q1", {0.0, 1.0}}});

    CHECK(naive_blend(m, n, 1.0, "q1") == m.ranks("q1"));
    CHECK(naive_blend(m, n, 0.0, "q1") == n.ranks("q1"));
    // alpha = 0.5 blends to [0.5, 0.5]; index tie-break
    CHECK(naive_blend(m, n, 0.5, "q1").ranks() == std::vector<int>{1, 2});

    CHECK_THROWS_AS(naive_blend(m, n, 1.5, "q1"), ValidationError);
    ModelRun r = ModelRun::from_ranks("r", {{"q1", {1, 2}}});
    CHECK_THROWS_WITH_AS(naive_blend(r, n, 0.5, "q1"), doctest::Contains("score-kind"),
                         ValidationError);
}

TEST_CASE("config validation") {
    EnsembleConfig config;
    config.ndcg_model_id = "ndcg";
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("non-empty"), ValidationError);
    config.mrr_model_ids = {"m1"};
    config.primary_mrr_model = "m2";
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("primary_mrr_model"),
                         ValidationError);
    config.primary_mrr_model = "m1";
    CHECK_NOTHROW(config.validate());
    config.rho_h = -1;
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.rho_h = 0;
    config.p = 0.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("subset monotonicity in each rho") {
    std::mt19937_64 rng(6303);
    for (int iter = 0; iter < 100; ++iter) {
        testutil::RandomInstance inst = testutil::random_ensemble_instance(rng);
        inst.config.enable_h = inst.config.enable_t = inst.config.enable_n = true;
        auto is_subset = [](const std::vector<int>& a, const std::vector<int>& b) {
            return std::includes(b.begin(), b.end(), a.begin(), a.end());
        };
        for (int lo = 0; lo < inst.n; ++lo) {
            EnsembleConfig narrow = inst.config;
            EnsembleConfig wide = inst.config;
            narrow.rho_h = lo;
            wide.rho_h = lo + 1;
            CHECK(is_subset(high_certainty_set(inst.runs, narrow, "q1"),
                            high_certainty_set(inst.runs, wide, "q1")));
            narrow = inst.config;
            wide = inst.config;
            narrow.rho_t = lo;
            wide.rho_t = lo + 1;
            CHECK(is_subset(top_answers_set(inst.runs, narrow, "q1"),
                            top_answers_set(inst.runs, wide, "q1")));
            narrow = inst.config;
            wide = inst.config;
            narrow.rho_nn = lo;
            wide.rho_nn = lo + 1;
            CHECK(is_subset(ndcg_agreement_set(inst.runs, narrow, "q1"),
                            ndcg_agreement_set(inst.runs, wide, "q1")));
            narrow = inst.config;
            wide = inst.config;
            narrow.rho_nm = lo;
            wide.rho_nm = lo + 1;
            CHECK(is_subset(ndcg_agreement_set(inst.runs, narrow, "q1"),
                            ndcg_agreement_set(inst.runs, wide, "q1")));
        }
    }
}
