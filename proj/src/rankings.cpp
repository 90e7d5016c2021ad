#include "rankmerge/rankings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "rankmerge/errors.hpp"

namespace rankmerge {

RankVector::RankVector(std::vector<int> ranks) : ranks_(std::move(ranks)) {
    const int n = static_cast<int>(ranks_.size());
    if (n == 0) throw ValidationError("rank vector is empty");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int r : ranks_) {
        if (r < 1 || r > n || seen[static_cast<std::size_t>(r - 1)]) {
            throw ValidationError("rank vector is not a permutation of 1..n");
        }
        seen[static_cast<std::size_t>(r - 1)] = 1;
    }
}

std::vector<int> RankVector::order() const {
    std::vector<int> out(ranks_.size());
    for (std::size_t c = 0; c < ranks_.size(); ++c) {
        out[static_cast<std::size_t>(ranks_[c] - 1)] = static_cast<int>(c);
    }
    return out;
}

RankVector RankVector::from_order(const std::vector<int>& order) {
    std::vector<int> ranks(order.size(), 0);
    const int n = static_cast<int>(order.size());
    for (int pos = 0; pos < n; ++pos) {
        int c = order[static_cast<std::size_t>(pos)];
        if (c < 0 || c >= n) throw ValidationError("order is not a permutation of 0..n-1");
        ranks[static_cast<std::size_t>(c)] = pos + 1;
    }
    return RankVector(std::move(ranks));
}

RankVector scores_to_ranks(std::span<const double> scores) {
    if (scores.empty()) throw ValidationError("scores_to_ranks: empty input");
    for (double s : scores) {
        if (!std::isfinite(s)) throw ValidationError("scores_to_ranks: non-finite score");
    }
    std::vector<int> by_score(scores.size());
    std::iota(by_score.begin(), by_score.end(), 0);
    std::sort(by_score.begin(), by_score.end(), [&](int a, int b) {
        double sa = scores[static_cast<std::size_t>(a)];
        double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    std::vector<int> ranks(scores.size());
    for (std::size_t pos = 0; pos < by_score.size(); ++pos) {
        ranks[static_cast<std::size_t>(by_score[pos])] = static_cast<int>(pos) + 1;
    }
    return RankVector(std::move(ranks));
}

ModelRun ModelRun::from_scores(std::string model_id,
                               std::vector<std::pair<std::string, std::vector<double>>> per_question) {
    ModelRun run;
    run.model_id_ = std::move(model_id);
    run.kind_ = RunKind::scores;
    run.question_order_.reserve(per_question.size());
    for (auto& [qid, scores] : per_question) {
        if (run.scores_.count(qid)) {
            throw ValidationError("run \"" + run.model_id_ + "\": duplicate question \"" + qid + "\"");
        }
        RankVector rv;
        try {
            rv = scores_to_ranks(scores); // also validates finiteness
        } catch (const ValidationError& e) {
            throw ValidationError("run \"" + run.model_id_ + "\", question \"" + qid +
                                  "\": " + e.what());
        }
        run.question_order_.push_back(qid);
        run.ranks_.emplace(qid, std::move(rv));
        run.scores_.emplace(qid, std::move(scores));
    }
    return run;
}

ModelRun ModelRun::from_ranks(std::string model_id,
                              std::vector<std::pair<std::string, std::vector<int>>> per_question) {
    ModelRun run;
    run.model_id_ = std::move(model_id);
    run.kind_ = RunKind::ranks;
    run.question_order_.reserve(per_question.size());
    for (auto& [qid, ranks] : per_question) {
        if (run.ranks_.count(qid)) {
            throw ValidationError("run \"" + run.model_id_ + "\": duplicate question \"" + qid + "\"");
        }
        RankVector rv;
        try {
            rv = RankVector(std::move(ranks)); // validates the permutation
        } catch (const ValidationError& e) {
            throw ValidationError("run \"" + run.model_id_ + "\", question \"" + qid +
                                  "\": " + e.what());
        }
        run.question_order_.push_back(qid);
        run.ranks_.emplace(qid, std::move(rv));
    }
    return run;
}

bool ModelRun::has_question(const std::string& question_id) const {
    return ranks_.count(question_id) != 0;
}

const RankVector& ModelRun::ranks(const std::string& question_id) const {
    auto it = ranks_.find(question_id);
    if (it == ranks_.end()) {
        throw ValidationError("run \"" + model_id_ + "\": unknown question \"" + question_id + "\"");
    }
    return it->second;
}

const std::vector<double>& ModelRun::scores(const std::string& question_id) const {
    if (kind_ != RunKind::scores) {
        throw ValidationError("run \"" + model_id_ + "\" holds ranks, scores required");
    }
    auto it = scores_.find(question_id);
    if (it == scores_.end()) {
        throw ValidationError("run \"" + model_id_ + "\": unknown question \"" + question_id + "\"");
    }
    return it->second;
}

TieStats run_tie_stats(const ModelRun& run) {
    TieStats stats;
    if (run.kind() != RunKind::scores) return stats;
    for (const auto& qid : run.question_order()) {
        std::vector<double> sorted = run.scores(qid);
        std::sort(sorted.begin(), sorted.end());
        std::size_t pairs = 0;
        for (std::size_t i = 0, j = 0; i < sorted.size(); i = j) {
            for (j = i; j < sorted.size() && sorted[j] == sorted[i]; ++j) {}
            std::size_t g = j - i;
            pairs += g * (g - 1) / 2;
        }
        if (pairs > 0) {
            ++stats.questions_with_ties;
            stats.tied_pairs += pairs;
        }
    }
    return stats;
}

void RunSet::add(ModelRun run) {
    auto [it, inserted] = by_id_.emplace(run.model_id(), runs_.size());
    if (!inserted) {
        throw ValidationError("duplicate model_id \"" + run.model_id() + "\"");
    }
    runs_.push_back(std::move(run));
}

bool RunSet::contains(const std::string& model_id) const { return by_id_.count(model_id) != 0; }

const ModelRun& RunSet::get(const std::string& model_id) const {
    auto it = by_id_.find(model_id);
    if (it == by_id_.end()) throw ValidationError("unknown model \"" + model_id + "\"");
    return runs_[it->second];
}

std::vector<int> top_n(const ModelRun& run, int n, const std::string& question_id) {
    if (n < 0) throw ValidationError("top_n: n must be nonnegative");
    const RankVector& rv = run.ranks(question_id);
    int cutoff = std::min(n, rv.size());
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(cutoff));
    for (int c = 0; c < rv.size(); ++c) {
        if (rv.rank_of(c) <= cutoff) out.push_back(c);
    }
    return out;
}

std::vector<int> top_n(const RunSet& runs, const std::string& model_id, int n,
                       const std::string& question_id) {
    return top_n(runs.get(model_id), n, question_id);
}

void validate_run_against_dataset(const ModelRun& run, const Dataset& ds) {
    for (const auto& q : ds.questions()) {
        if (!run.has_question(q.question_id)) {
            throw ValidationError("run \"" + run.model_id() + "\": missing question \"" +
                                  q.question_id + "\"");
        }
        if (run.ranks(q.question_id).size() != q.candidate_count) {
            throw ValidationError("run \"" + run.model_id() + "\": length mismatch for question \"" +
                                  q.question_id + "\"");
        }
    }
    if (run.question_count() != ds.size()) {
        for (const auto& qid : run.question_order()) {
            if (!ds.contains(qid)) {
                throw ValidationError("run \"" + run.model_id() + "\": extra question \"" + qid +
                                      "\"");
            }
        }
    }
}

} // namespace rankmerge
