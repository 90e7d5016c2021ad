#include "rankmerge/dataset.hpp"

#include <utility>

#include "rankmerge/errors.hpp"

namespace rankmerge {

void check_question_record(const QuestionRecord& q) {
    if (q.candidate_count < 1) {
        throw ValidationError("question \"" + q.question_id + "\": candidate_count must be >= 1");
    }
    if (q.gt_index < 0 || q.gt_index >= q.candidate_count) {
        throw ValidationError("question \"" + q.question_id + "\": gt_index out of range");
    }
    if (q.relevance) {
        if (static_cast<int>(q.relevance->size()) != q.candidate_count) {
            throw ValidationError("question \"" + q.question_id +
                                  "\": relevance length mismatch");
        }
        for (double s : *q.relevance) {
            if (!(s >= 0.0 && s <= 1.0)) {
                throw ValidationError("question \"" + q.question_id +
                                      "\": relevance entry outside [0,1]");
            }
        }
    }
    if (q.candidates && static_cast<int>(q.candidates->size()) != q.candidate_count) {
        throw ValidationError("question \"" + q.question_id + "\": candidates length mismatch");
    }
}

Dataset::Dataset(std::vector<QuestionRecord> questions) : questions_(std::move(questions)) {
    by_id_.reserve(questions_.size());
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        check_question_record(questions_[i]);
        auto [it, inserted] = by_id_.emplace(questions_[i].question_id, i);
        if (!inserted) {
            throw ValidationError("duplicate question_id \"" + questions_[i].question_id + "\"");
        }
    }
}

bool Dataset::contains(const std::string& question_id) const {
    return by_id_.count(question_id) != 0;
}

std::size_t Dataset::index_of(const std::string& question_id) const {
    auto it = by_id_.find(question_id);
    if (it == by_id_.end()) {
        throw ValidationError("unknown question_id \"" + question_id + "\"");
    }
    return it->second;
}

} // namespace rankmerge
