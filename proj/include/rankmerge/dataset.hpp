#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rankmerge {

// One dialog question: n candidate answers, the index of the human-derived
// answer, and (optionally) a per-candidate relevance fraction in [0,1].
struct QuestionRecord {
    std::string question_id;
    int candidate_count = 0;
    int gt_index = 0;
    std::optional<std::vector<double>> relevance;
    // Display labels only; never consulted by any computation.
    std::optional<std::vector<std::string>> candidates;

    bool has_relevance() const { return relevance.has_value(); }
};

// Throws ValidationError unless all QuestionRecord invariants hold:
// candidate_count >= 1, 0 <= gt_index < candidate_count, and a present
// relevance vector has matching length with every entry in [0,1].
void check_question_record(const QuestionRecord& q);

// An ordered evaluation corpus with unique question ids.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<QuestionRecord> questions);

    const std::vector<QuestionRecord>& questions() const { return questions_; }
    const QuestionRecord& at(std::size_t i) const { return questions_[i]; }
    std::size_t size() const { return questions_.size(); }
    bool empty() const { return questions_.empty(); }

    bool contains(const std::string& question_id) const;
    // Index of a question in corpus order; throws ValidationError if absent.
    std::size_t index_of(const std::string& question_id) const;

private:
    std::vector<QuestionRecord> questions_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

} // namespace rankmerge
