#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ragstress/corpus.hpp"
#include "ragstress/defects.hpp"

namespace ragstress {

/// The four listwise assessments of the detection task. Kept in bijection
/// with DefectType: Positive<->1, Noisy<->2, Irrelevant<->3,
/// Counterfactual<->4.
enum class AssessmentLabel {
    kHelps = 1,
    kPossiblyRelevant = 2,
    kIrrelevant = 3,
    kIncorrect = 4,
};

AssessmentLabel assessment_for(DefectType type);
DefectType defect_for(AssessmentLabel label);

/// Slot labels of a context mapped through the bijection, in slot order.
std::vector<AssessmentLabel> context_labels(const DefectiveContext& context);

/// How a document appears inside every prompt: "{title}. {body}".
std::string render_document(const Document& doc);

/// "Doc 1: ...\nDoc 2: ..." lines for the given documents, in order.
std::string render_doc_lines(const std::vector<Document>& docs);

/// Detection-task prompt for a (possibly defective) context.
std::string render_dd_prompt(const DefectiveContext& context, std::string_view question);

/// Detection-task target: one "Doc {i} {phrase}." line per label, newline
/// separated, no trailing newline.
std::string render_dd_target(const std::vector<AssessmentLabel>& labels);

/// Inverse of render_dd_target. Matching is per line, tolerant of
/// surrounding whitespace and letter case; lines bind to doc indices by the
/// leading "Doc {i}". Exactly k recognized lines covering indices 1..k are
/// required.
std::vector<AssessmentLabel> parse_dd_output(std::string_view text, std::size_t k);

/// Answer-extraction prompt for a (possibly defective) context.
std::string render_ue_prompt(const DefectiveContext& context, std::string_view question);

/// Step-1 prompt: ask for a misleading wrong answer given the question, its
/// correct answer, and the clean documents.
std::string render_wrong_answer_prompt(const std::vector<Document>& docs,
                                       std::string_view question,
                                       std::string_view correct_answer);

/// Step-2 prompt: rewrite one document so the correct answer is replaced by
/// the wrong one. Only the body is shown, so the reply can replace the
/// stored body verbatim; the title stays attached to the document record.
std::string render_rewrite_prompt(const Document& doc, std::string_view correct_answer,
                                  std::string_view wrong_answer);

// Raw templates, exposed so their bytes can be audited.
std::string_view dd_input_template();
std::string_view ue_input_template();
std::string_view wrong_answer_input_template();
std::string_view rewrite_input_template();

}  // namespace ragstress
