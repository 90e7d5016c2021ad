#include "rankmerge/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rankmerge/errors.hpp"
#include "rankmerge/parallel.hpp"

namespace rankmerge {

void EnsembleConfig::validate() const {
    if (mrr_model_ids.empty()) throw ValidationError("config: mrr_model_ids must be non-empty");
    if (std::find(mrr_model_ids.begin(), mrr_model_ids.end(), primary_mrr_model) ==
        mrr_model_ids.end()) {
        throw ValidationError("config: primary_mrr_model \"" + primary_mrr_model +
                              "\" is not one of the mrr_model_ids");
    }
    if (ndcg_model_id.empty()) throw ValidationError("config: ndcg_model_id must be set");
    if (rho_h < 0 || rho_t < 0 || rho_nn < 0 || rho_nm < 0) {
        throw ValidationError("config: rho values must be nonnegative");
    }
    if (!(p > 0.0)) throw ValidationError("config: p must be positive");
}

char provenance_tag(Provenance p) {
    switch (p) {
        case Provenance::high_certainty: return 'H';
        case Provenance::top_answer: return 'T';
        case Provenance::ndcg_agreement: return 'N';
        case Provenance::remainder: return 'R';
    }
    return '?';
}

namespace {

// Per-question view with all rank vectors resolved once.
struct QuestionView {
    std::vector<const RankVector*> mrr;
    const RankVector* ndcg = nullptr;    // null when resolved without the gain model
    const RankVector* primary = nullptr; // null when resolved without the primary
    int n = 0;
};

QuestionView make_mrr_view(const RunSet& runs, const EnsembleConfig& config,
                           const std::string& question_id) {
    QuestionView view;
    view.mrr.reserve(config.mrr_model_ids.size());
    for (const auto& id : config.mrr_model_ids) {
        view.mrr.push_back(&runs.get(id).ranks(question_id));
    }
    if (view.mrr.empty()) throw ValidationError("config: mrr_model_ids must be non-empty");
    view.n = view.mrr.front()->size();
    for (const RankVector* rv : view.mrr) {
        if (rv->size() != view.n) {
            throw ValidationError("models disagree on candidate count for question \"" +
                                  question_id + "\"");
        }
    }
    return view;
}

QuestionView make_view(const RunSet& runs, const EnsembleConfig& config,
                       const std::string& question_id) {
    QuestionView view = make_mrr_view(runs, config, question_id);
    view.ndcg = &runs.get(config.ndcg_model_id).ranks(question_id);
    view.primary = &runs.get(config.primary_mrr_model).ranks(question_id);
    if (view.ndcg->size() != view.n) {
        throw ValidationError("models disagree on candidate count for question \"" + question_id +
                              "\"");
    }
    return view;
}

// rank <= min(prefix, n) membership test on a full rank vector.
bool in_top(const RankVector& rv, int candidate, int prefix) {
    return rv.rank_of(candidate) <= std::min(prefix, rv.size());
}

std::vector<int> high_certainty_set(const QuestionView& view, const EnsembleConfig& config) {
    std::vector<int> out;
    if (!config.enable_h) return out;
    for (int c = 0; c < view.n; ++c) {
        bool everywhere = true;
        for (const RankVector* rv : view.mrr) {
            if (!in_top(*rv, c, config.rho_h)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) out.push_back(c);
    }
    return out;
}

std::vector<int> top_answers_set(const QuestionView& view, const EnsembleConfig& config) {
    std::vector<int> out;
    if (!config.enable_t) return out;
    for (int c = 0; c < view.n; ++c) {
        for (const RankVector* rv : view.mrr) {
            if (in_top(*rv, c, config.rho_t)) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

std::vector<int> ndcg_agreement_set(const QuestionView& view, const EnsembleConfig& config) {
    std::vector<int> out;
    if (!config.enable_n) return out;
    for (int c = 0; c < view.n; ++c) {
        if (!in_top(*view.ndcg, c, config.rho_nn)) continue;
        for (const RankVector* rv : view.mrr) {
            if (in_top(*rv, c, config.rho_nm)) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

MrrCandidateSet mrr_candidate_set(const QuestionView& view, const EnsembleConfig& config) {
    MrrCandidateSet set;
    set.tag_by_candidate.assign(static_cast<std::size_t>(view.n), Provenance::remainder);
    // Priority H > T > N: claim in priority order, never overwrite.
    for (int c : high_certainty_set(view, config)) {
        set.tag_by_candidate[static_cast<std::size_t>(c)] = Provenance::high_certainty;
    }
    for (int c : top_answers_set(view, config)) {
        auto& tag = set.tag_by_candidate[static_cast<std::size_t>(c)];
        if (tag == Provenance::remainder) tag = Provenance::top_answer;
    }
    for (int c : ndcg_agreement_set(view, config)) {
        auto& tag = set.tag_by_candidate[static_cast<std::size_t>(c)];
        if (tag == Provenance::remainder) tag = Provenance::ndcg_agreement;
    }
    for (int c = 0; c < view.n; ++c) {
        if (set.tag_by_candidate[static_cast<std::size_t>(c)] != Provenance::remainder) {
            set.members.push_back(c);
        }
    }
    return set;
}

std::int64_t rank_product(const QuestionView& view, int candidate) {
    std::int64_t product = 1;
    for (const RankVector* rv : view.mrr) {
        std::int64_t r = rv->rank_of(candidate);
        if (__builtin_mul_overflow(product, r, &product)) {
            throw std::overflow_error("rank product exceeds 64-bit range");
        }
    }
    return product;
}

double second_step_key(const QuestionView& view, const EnsembleConfig& config, int candidate) {
    double r_n = view.ndcg->rank_of(candidate);
    double r_m = view.primary->rank_of(candidate);
    return std::pow(r_n, config.p) * r_m;
}

MergedRanking two_step_rank(const QuestionView& view, const EnsembleConfig& config) {
    MrrCandidateSet set = mrr_candidate_set(view, config);
    const RankVector& primary = *view.primary;

    std::vector<int> members = set.members;
    std::vector<std::int64_t> product(static_cast<std::size_t>(view.n), 0);
    for (int c : members) product[static_cast<std::size_t>(c)] = rank_product(view, c);
    std::sort(members.begin(), members.end(), [&](int a, int b) {
        auto pa = product[static_cast<std::size_t>(a)];
        auto pb = product[static_cast<std::size_t>(b)];
        if (pa != pb) return pa < pb;
        if (primary.rank_of(a) != primary.rank_of(b)) return primary.rank_of(a) < primary.rank_of(b);
        return a < b;
    });

    std::vector<int> remainder;
    remainder.reserve(static_cast<std::size_t>(view.n) - members.size());
    for (int c = 0; c < view.n; ++c) {
        if (set.tag_by_candidate[static_cast<std::size_t>(c)] == Provenance::remainder) {
            remainder.push_back(c);
        }
    }
    std::vector<double> key(static_cast<std::size_t>(view.n), 0.0);
    for (int c : remainder) key[static_cast<std::size_t>(c)] = second_step_key(view, config, c);
    std::sort(remainder.begin(), remainder.end(), [&](int a, int b) {
        double ka = key[static_cast<std::size_t>(a)];
        double kb = key[static_cast<std::size_t>(b)];
        if (ka != kb) return ka < kb;
        if (primary.rank_of(a) != primary.rank_of(b)) return primary.rank_of(a) < primary.rank_of(b);
        return a < b;
    });

    MergedRanking merged;
    merged.order.reserve(static_cast<std::size_t>(view.n));
    merged.provenance.reserve(static_cast<std::size_t>(view.n));
    for (int c : members) {
        merged.order.push_back(c);
        merged.provenance.push_back(set.tag_by_candidate[static_cast<std::size_t>(c)]);
    }
    for (int c : remainder) {
        merged.order.push_back(c);
        merged.provenance.push_back(Provenance::remainder);
    }
    merged.mrr_set_size = static_cast<int>(members.size());
    return merged;
}

} // namespace

std::vector<int> high_certainty_set(const RunSet& runs, const EnsembleConfig& config,
                                    const std::string& question_id) {
    if (!config.enable_h) return {};
    return high_certainty_set(make_mrr_view(runs, config, question_id), config);
}

std::vector<int> top_answers_set(const RunSet& runs, const EnsembleConfig& config,
                                 const std::string& question_id) {
    if (!config.enable_t) return {};
    return top_answers_set(make_mrr_view(runs, config, question_id), config);
}

std::vector<int> ndcg_agreement_set(const RunSet& runs, const EnsembleConfig& config,
                                    const std::string& question_id) {
    if (!config.enable_n) return {};
    QuestionView view = make_mrr_view(runs, config, question_id);
    view.ndcg = &runs.get(config.ndcg_model_id).ranks(question_id);
    if (view.ndcg->size() != view.n) {
        throw ValidationError("models disagree on candidate count for question \"" + question_id +
                              "\"");
    }
    return ndcg_agreement_set(view, config);
}

MrrCandidateSet mrr_candidate_set(const RunSet& runs, const EnsembleConfig& config,
                                  const std::string& question_id) {
    if (!config.enable_n) {
        QuestionView view = make_mrr_view(runs, config, question_id);
        return mrr_candidate_set(view, config);
    }
    return mrr_candidate_set(make_view(runs, config, question_id), config);
}

std::int64_t mrr_step_rank(const RunSet& runs, const EnsembleConfig& config,
                           const std::string& question_id, int candidate) {
    return rank_product(make_mrr_view(runs, config, question_id), candidate);
}

double ndcg_step_key(const RunSet& runs, const EnsembleConfig& config,
                     const std::string& question_id, int candidate) {
    return second_step_key(make_view(runs, config, question_id), config, candidate);
}

MergedRanking two_step_rank(const RunSet& runs, const EnsembleConfig& config,
                            const std::string& question_id) {
    config.validate();
    return two_step_rank(make_view(runs, config, question_id), config);
}

std::vector<MergedRanking> two_step_rank_all(const RunSet& runs, const EnsembleConfig& config,
                                             const Dataset& ds, int threads) {
    config.validate();
    std::vector<MergedRanking> out(ds.size());
    parallel_for(ds.size(), threads, [&](std::size_t i) {
        out[i] = two_step_rank(make_view(runs, config, ds.at(i).question_id), config);
    });
    return out;
}

RankVector naive_blend(const ModelRun& mrr_run, const ModelRun& ndcg_run, double alpha,
                       const std::string& question_id) {
    if (mrr_run.kind() != RunKind::scores || ndcg_run.kind() != RunKind::scores) {
        throw ValidationError("naive_blend: both runs must be score-kind");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("naive_blend: alpha outside [0,1]");
    const std::vector<double>& s_m = mrr_run.scores(question_id);
    const std::vector<double>& s_n = ndcg_run.scores(question_id);
    if (s_m.size() != s_n.size()) {
        throw ValidationError("naive_blend: score length mismatch for question \"" + question_id +
                              "\"");
    }
    std::vector<double> blended(s_m.size());
    for (std::size_t j = 0; j < s_m.size(); ++j) {
        blended[j] = alpha * s_m[j] + (1.0 - alpha) * s_n[j];
    }
    return scores_to_ranks(blended);
}

std::vector<RankVector> naive_blend_all(const ModelRun& mrr_run, const ModelRun& ndcg_run,
                                        double alpha, const Dataset& ds, int threads) {
    std::vector<RankVector> out(ds.size());
    parallel_for(ds.size(), threads, [&](std::size_t i) {
        out[i] = naive_blend(mrr_run, ndcg_run, alpha, ds.at(i).question_id);
    });
    return out;
}

} // namespace rankmerge
