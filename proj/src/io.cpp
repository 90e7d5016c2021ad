#include "rankmerge/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "rankmerge/errors.hpp"

namespace rankmerge {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

json parse_line(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        fail_line(line_no, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) fail_line(line_no, "record is not an object");
    return j;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string get_string(const json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        fail_line(line_no, std::string("missing or non-string \"") + key + "\"");
    }
    return it->get<std::string>();
}

int get_int(const json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
        fail_line(line_no, std::string("missing or non-integer \"") + key + "\"");
    }
    return it->get<int>();
}

// Fixed 6-decimal metric formatting keeps emitted artifacts byte-stable.
std::string fmt_metric(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Compact formatting for sweep values (3 -> "3", 0.05 -> "0.05").
std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

Dataset load_dataset(std::istream& in) {
    std::vector<QuestionRecord> questions;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        json j = parse_line(line, line_no);
        QuestionRecord q;
        q.question_id = get_string(j, "question_id", line_no);
        q.candidate_count = get_int(j, "candidate_count", line_no);
        q.gt_index = get_int(j, "gt_index", line_no);
        if (auto it = j.find("relevance"); it != j.end() && !it->is_null()) {
            if (!it->is_array()) fail_line(line_no, "\"relevance\" is not an array");
            std::vector<double> rel;
            rel.reserve(it->size());
            for (const auto& v : *it) {
                if (!v.is_number()) fail_line(line_no, "non-numeric relevance entry");
                rel.push_back(v.get<double>());
            }
            q.relevance = std::move(rel);
        }
        if (auto it = j.find("candidates"); it != j.end() && !it->is_null()) {
            if (!it->is_array()) fail_line(line_no, "\"candidates\" is not an array");
            std::vector<std::string> labels;
            labels.reserve(it->size());
            for (const auto& v : *it) {
                if (!v.is_string()) fail_line(line_no, "non-string candidate label");
                labels.push_back(v.get<std::string>());
            }
            q.candidates = std::move(labels);
        }
        try {
            check_question_record(q);
        } catch (const ValidationError& e) {
            fail_line(line_no, e.what());
        }
        if (!seen.insert(q.question_id).second) {
            fail_line(line_no, "duplicate question_id \"" + q.question_id + "\"");
        }
        questions.push_back(std::move(q));
    }
    return Dataset(std::move(questions));
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open annotations file \"" + path + "\"");
    try {
        return load_dataset(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void serialize_dataset(const Dataset& ds, std::ostream& out) {
    for (const auto& q : ds.questions()) {
        ordered_json j;
        j["question_id"] = q.question_id;
        j["candidate_count"] = q.candidate_count;
        j["gt_index"] = q.gt_index;
        if (q.relevance) j["relevance"] = *q.relevance;
        if (q.candidates) j["candidates"] = *q.candidates;
        out << j.dump() << '\n';
    }
}

ModelRun load_run(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    std::string model_id;
    std::string kind;
    bool have_header = false;
    std::vector<std::pair<std::string, std::vector<double>>> score_records;
    std::vector<std::pair<std::string, std::vector<int>>> rank_records;

    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        json j = parse_line(line, line_no);
        if (!have_header) {
            model_id = get_string(j, "model_id", line_no);
            kind = get_string(j, "kind", line_no);
            if (kind != "scores" && kind != "ranks") {
                fail_line(line_no, "kind must be \"scores\" or \"ranks\"");
            }
            have_header = true;
            continue;
        }
        std::string qid = get_string(j, "question_id", line_no);
        bool has_scores = j.contains("scores");
        bool has_ranks = j.contains("ranks");
        if (has_scores && has_ranks) fail_line(line_no, "record carries both scores and ranks");
        if (kind == "scores") {
            if (has_ranks) fail_line(line_no, "ranks record in a scores-kind run");
            if (!has_scores || !j["scores"].is_array()) {
                fail_line(line_no, "missing \"scores\" array");
            }
            std::vector<double> scores;
            scores.reserve(j["scores"].size());
            for (const auto& v : j["scores"]) {
                if (!v.is_number()) fail_line(line_no, "non-numeric score");
                scores.push_back(v.get<double>());
            }
            score_records.emplace_back(std::move(qid), std::move(scores));
        } else {
            if (has_scores) fail_line(line_no, "scores record in a ranks-kind run");
            if (!has_ranks || !j["ranks"].is_array()) fail_line(line_no, "missing \"ranks\" array");
            std::vector<int> ranks;
            ranks.reserve(j["ranks"].size());
            for (const auto& v : j["ranks"]) {
                if (!v.is_number_integer()) fail_line(line_no, "non-integer rank");
                ranks.push_back(v.get<int>());
            }
            rank_records.emplace_back(std::move(qid), std::move(ranks));
        }
    }
    if (!have_header) throw ValidationError("prediction file has no header record");
    if (kind == "scores") return ModelRun::from_scores(std::move(model_id), std::move(score_records));
    return ModelRun::from_ranks(std::move(model_id), std::move(rank_records));
}

ModelRun load_run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open prediction file \"" + path + "\"");
    try {
        return load_run(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void serialize_run(const ModelRun& run, std::ostream& out) {
    ordered_json header;
    header["model_id"] = run.model_id();
    header["kind"] = run.kind() == RunKind::scores ? "scores" : "ranks";
    out << header.dump() << '\n';
    for (const auto& qid : run.question_order()) {
        ordered_json j;
        j["question_id"] = qid;
        if (run.kind() == RunKind::scores) {
            j["scores"] = run.scores(qid);
        } else {
            j["ranks"] = run.ranks(qid).ranks();
        }
        out << j.dump() << '\n';
    }
}

void write_merged_rankings(const std::vector<std::string>& question_ids,
                           const std::vector<MergedRanking>& merged, std::ostream& out) {
    for (std::size_t i = 0; i < merged.size(); ++i) {
        ordered_json j;
        j["question_id"] = question_ids[i];
        j["order"] = merged[i].order;
        std::vector<std::string> tags;
        tags.reserve(merged[i].provenance.size());
        for (Provenance p : merged[i].provenance) tags.emplace_back(1, provenance_tag(p));
        j["provenance"] = tags;
        out << j.dump() << '\n';
    }
}

void write_blend_rankings(const std::vector<std::string>& question_ids,
                          const std::vector<RankVector>& rankings, std::ostream& out) {
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        ordered_json j;
        j["question_id"] = question_ids[i];
        j["order"] = rankings[i].order();
        out << j.dump() << '\n';
    }
}

LoadedRanking load_merged_rankings(std::istream& in) {
    LoadedRanking loaded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        json j = parse_line(line, line_no);
        std::string qid = get_string(j, "question_id", line_no);
        auto it = j.find("order");
        if (it == j.end() || !it->is_array()) fail_line(line_no, "missing \"order\" array");
        std::vector<int> order;
        order.reserve(it->size());
        for (const auto& v : *it) {
            if (!v.is_number_integer()) fail_line(line_no, "non-integer order entry");
            order.push_back(v.get<int>());
        }
        int set_size = -1;
        if (auto p = j.find("provenance"); p != j.end() && p->is_array()) {
            set_size = 0;
            for (const auto& tag : *p) {
                if (tag.is_string() && tag.get<std::string>() != "R") ++set_size;
            }
        }
        try {
            loaded.rankings.push_back(RankVector::from_order(order));
        } catch (const ValidationError& e) {
            fail_line(line_no, e.what());
        }
        loaded.question_ids.push_back(std::move(qid));
        loaded.mrr_set_sizes.push_back(set_size);
    }
    return loaded;
}

LoadedRanking load_merged_rankings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open rankings file \"" + path + "\"");
    try {
        return load_merged_rankings(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_metrics_text(const MetricsReport& report, std::ostream& out) {
    auto row = [&](const std::string& key, const std::string& value) {
        out << key;
        for (std::size_t i = key.size(); i < 14; ++i) out << ' ';
        out << value << '\n';
    };
    row("d", std::to_string(report.d));
    row("mrr", fmt_metric(report.mrr));
    for (const auto& [k, v] : report.recall_at) row("r@" + std::to_string(k), fmt_metric(v));
    row("mean_rank", fmt_metric(report.mean_rank));
    if (report.ndcg) row("ndcg", fmt_metric(*report.ndcg));
    if (report.avg_mrr_set_size) row("avg_set_size", fmt_metric(*report.avg_mrr_set_size));
}

void write_metrics_jsonl(const MetricsReport& report, std::ostream& out) {
    ordered_json j;
    j["d"] = report.d;
    j["mrr"] = report.mrr;
    for (const auto& [k, v] : report.recall_at) j["r@" + std::to_string(k)] = v;
    j["mean_rank"] = report.mean_rank;
    if (report.ndcg) j["ndcg"] = *report.ndcg;
    if (report.avg_mrr_set_size) j["avg_set_size"] = *report.avg_mrr_set_size;
    out << j.dump() << '\n';
}

namespace {

void metrics_csv_cells(const MetricsReport& r, std::ostream& out) {
    out << fmt_metric(r.mrr);
    for (const auto& [k, v] : r.recall_at) out << ',' << fmt_metric(v);
    out << ',' << fmt_metric(r.mean_rank);
    out << ',' << (r.ndcg ? fmt_metric(*r.ndcg) : "");
    out << ',' << (r.avg_mrr_set_size ? fmt_metric(*r.avg_mrr_set_size) : "");
}

void metrics_csv_header(const MetricsReport& r, std::ostream& out) {
    out << "mrr";
    for (const auto& [k, v] : r.recall_at) out << ",r@" << k;
    out << ",mean_rank,ndcg,avg_set_size";
}

} // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    if (result.rows.empty()) return;
    out << "value,";
    metrics_csv_header(result.rows.front().report, out);
    out << '\n';
    for (const auto& row : result.rows) {
        out << fmt_value(row.value) << ',';
        metrics_csv_cells(row.report, out);
        out << '\n';
    }
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
    if (rows.empty()) return;
    out << "h,t,n,";
    metrics_csv_header(rows.front().report, out);
    out << '\n';
    for (const auto& row : rows) {
        out << (row.enable_h ? 1 : 0) << ',' << (row.enable_t ? 1 : 0) << ','
            << (row.enable_n ? 1 : 0) << ',';
        metrics_csv_cells(row.report, out);
        out << '\n';
    }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open output file \"" + tmp + "\"");
        out << contents;
        out.flush();
        if (!out) throw ValidationError("failed writing output file \"" + tmp + "\"");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ValidationError("failed to move output into place at \"" + path + "\"");
    }
}

} // namespace rankmerge
