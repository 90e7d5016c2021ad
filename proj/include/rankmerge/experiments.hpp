#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankmerge/dataset.hpp"
#include "rankmerge/ensemble.hpp"
#include "rankmerge/metrics.hpp"
#include "rankmerge/rankings.hpp"

namespace rankmerge {

enum class SweepParameter { rho_h, rho_t, rho_nn, rho_nm, p, alpha };

const char* sweep_parameter_name(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& name);

// One-at-a-time sweep: vary `parameter` over `values`, all other settings
// fixed at base_config. The objective picks a winner as
// w_mrr * MRR + w_ndcg * NDCG.
struct SweepSpec {
    SweepParameter parameter = SweepParameter::rho_h;
    std::vector<double> values; // non-empty, strictly increasing
    EnsembleConfig base_config;
    double w_mrr = 0.5;
    double w_ndcg = 0.5;

    void validate() const;
};

struct SweepRow {
    double value = 0.0;
    MetricsReport report;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t best_index = 0; // argmax of the weighted objective, first on ties
};

struct AblationRow {
    bool enable_h = false;
    bool enable_t = false;
    bool enable_n = false;
    MetricsReport report; // avg_mrr_set_size always present
};

// The 7 non-empty on/off combinations of (H, T, N), in the fixed row order
// H / T / N / T+N / H+N / H+T / H+T+N.
std::vector<AblationRow> run_ablation(const Dataset& ds, const RunSet& runs,
                                      const EnsembleConfig& base, int threads = 1,
                                      const EvaluateOptions& eval = {});

SweepResult run_sweep(const Dataset& ds, const RunSet& runs, const SweepSpec& spec,
                      int threads = 1, EvaluateOptions eval = {});

// Per-question listing: the ranked first-step candidate set with [H]/[T]/[N]
// tags, then the top `remainder_depth` second-step candidates.
std::string provenance_report(const Dataset& ds, const RunSet& runs,
                              const EnsembleConfig& config,
                              const std::vector<std::string>& question_ids,
                              int remainder_depth = 10);

// Synthetic corpus + model runs, deterministic given the seed.
struct SynthSpec {
    std::size_t d = 0;        // questions
    int n = 0;                // candidates per question
    int n_m = 0;              // reciprocal-rank model count
    double mrr_fidelity = 0.0; // P(a model ranks the reference answer first)
    double ndcg_fidelity = 0.0; // strength of the gain model's relevance correlation
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthOutput {
    Dataset dataset;
    RunSet runs; // "mrr_1".."mrr_<n_m>" score runs, then "ndcg"
};

SynthOutput generate_synthetic(const SynthSpec& spec);

} // namespace rankmerge
