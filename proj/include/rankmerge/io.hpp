#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankmerge/dataset.hpp"
#include "rankmerge/ensemble.hpp"
#include "rankmerge/experiments.hpp"
#include "rankmerge/metrics.hpp"
#include "rankmerge/rankings.hpp"

namespace rankmerge {

// Annotation files are newline-delimited JSON records, one per question:
//   {"question_id": "q1", "candidate_count": 100, "gt_index": 37,
//    "relevance": [...], "candidates": [...]}
// relevance and candidates are optional. Errors report the 1-based line.
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);
void serialize_dataset(const Dataset& ds, std::ostream& out);

// Prediction files start with a header record {"model_id": ..., "kind":
// "scores"|"ranks"} followed by {"question_id": ..., "scores": [...]} or
// {"question_id": ..., "ranks": [...]} records matching the declared kind.
ModelRun load_run(std::istream& in);
ModelRun load_run_file(const std::string& path);
void serialize_run(const ModelRun& run, std::ostream& out);

// Merged rankings as JSONL: {"question_id", "order", "provenance"} where
// provenance holds one of "H"/"T"/"N"/"R" per position. Blend-mode outputs
// omit the provenance array.
void write_merged_rankings(const std::vector<std::string>& question_ids,
                           const std::vector<MergedRanking>& merged, std::ostream& out);
void write_blend_rankings(const std::vector<std::string>& question_ids,
                          const std::vector<RankVector>& rankings, std::ostream& out);

struct LoadedRanking {
    std::vector<std::string> question_ids;
    std::vector<RankVector> rankings;
    std::vector<int> mrr_set_sizes; // -1 where provenance was absent
};
LoadedRanking load_merged_rankings(std::istream& in);
LoadedRanking load_merged_rankings_file(const std::string& path);

// Flat key-value table, one metric per line.
void write_metrics_text(const MetricsReport& report, std::ostream& out);
// Single-record JSONL form of the same report.
void write_metrics_jsonl(const MetricsReport& report, std::ostream& out);

// CSV with header value,mrr,r@1,r@5,r@10,mean_rank,ndcg,avg_set_size.
// Absent fields are left empty.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
// CSV with header h,t,n,mrr,r@1,r@5,r@10,mean_rank,ndcg,avg_set_size.
void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);

// Writes via a temp file and renames into place.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace rankmerge
