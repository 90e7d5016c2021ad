#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankmerge/dataset.hpp"

namespace rankmerge {

// 1-based ranks indexed by candidate: ranks()[c] is candidate c's rank.
// Always a permutation of {1,...,n}.
class RankVector {
public:
    RankVector() = default;
    // Validates the permutation property; throws ValidationError otherwise.
    explicit RankVector(std::vector<int> ranks);

    const std::vector<int>& ranks() const { return ranks_; }
    int rank_of(int candidate) const { return ranks_[static_cast<std::size_t>(candidate)]; }
    int size() const { return static_cast<int>(ranks_.size()); }

    // order()[i] is the candidate placed at 1-based position i+1.
    std::vector<int> order() const;
    static RankVector from_order(const std::vector<int>& order);

    friend bool operator==(const RankVector&, const RankVector&) = default;

private:
    std::vector<int> ranks_;
};

// Ranks a score vector: strictly greater score gets a strictly smaller rank,
// ties broken by ascending candidate index. Output is a permutation.
RankVector scores_to_ranks(std::span<const double> scores);

enum class RunKind { scores, ranks };

// One model's predictions over a corpus. Score runs keep their raw scores
// (the naive blend needs them); rank vectors are materialized for every
// question at construction so downstream code is rank-only. Immutable after
// construction.
class ModelRun {
public:
    static ModelRun from_scores(std::string model_id,
                                std::vector<std::pair<std::string, std::vector<double>>> per_question);
    static ModelRun from_ranks(std::string model_id,
                               std::vector<std::pair<std::string, std::vector<int>>> per_question);

    const std::string& model_id() const { return model_id_; }
    RunKind kind() const { return kind_; }
    std::size_t question_count() const { return question_order_.size(); }
    // Question ids in input order.
    const std::vector<std::string>& question_order() const { return question_order_; }

    bool has_question(const std::string& question_id) const;
    const RankVector& ranks(const std::string& question_id) const;
    // Throws ValidationError on a ranks-kind run.
    const std::vector<double>& scores(const std::string& question_id) const;

private:
    ModelRun() = default;

    std::string model_id_;
    RunKind kind_ = RunKind::scores;
    std::vector<std::string> question_order_;
    std::unordered_map<std::string, RankVector> ranks_;
    std::unordered_map<std::string, std::vector<double>> scores_;
};

// Tie diagnostics for a score run (rank runs are tie-free by construction).
struct TieStats {
    std::size_t questions_with_ties = 0;
    std::size_t tied_pairs = 0;
};
TieStats run_tie_stats(const ModelRun& run);

// Insertion-ordered collection of runs keyed by model_id.
class RunSet {
public:
    void add(ModelRun run);
    bool contains(const std::string& model_id) const;
    const ModelRun& get(const std::string& model_id) const;
    const std::vector<ModelRun>& runs() const { return runs_; }
    std::size_t size() const { return runs_.size(); }

private:
    std::vector<ModelRun> runs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// The top-n operator: candidate indices holding ranks 1..n under the given
// model, clamped to the candidate count. Returned ascending by candidate
// index; semantically a set.
std::vector<int> top_n(const RunSet& runs, const std::string& model_id, int n,
                       const std::string& question_id);
std::vector<int> top_n(const ModelRun& run, int n, const std::string& question_id);

// Succeeds iff the run covers exactly the dataset's question ids and every
// per-question vector length equals that question's candidate_count. Throws
// ValidationError naming the offending question_id otherwise.
void validate_run_against_dataset(const ModelRun& run, const Dataset& ds);

} // namespace rankmerge
