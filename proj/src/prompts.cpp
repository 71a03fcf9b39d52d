#include "ragstress/prompts.hpp"

#include <initializer_list>
#include <optional>
#include <utility>

#include "ragstress/prompt_templates.hpp"
#include "ragstress/errors.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

// The asset files end with a newline; rendered prompts do not.
std::string_view strip_final_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

/// Substitute {name} placeholders. Only the template is scanned, so braces
/// inside substituted values stay inert.
std::string render_template(
    std::string_view tpl,
    std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        bool substituted = false;
        if (tpl[i] == '{') {
            for (const auto& [name, value] : values) {
                const std::size_t close = i + 1 + name.size();
                if (close < tpl.size() && tpl[close] == '}' &&
                    tpl.compare(i + 1, name.size(), name) == 0) {
                    out.append(value);
                    i = close + 1;
                    substituted = true;
                    break;
                }
            }
        }
        if (!substituted) {
            out.push_back(tpl[i]);
            ++i;
        }
    }
    return out;
}

constexpr std::string_view kPhrases[4] = {
    "helps answer the question.",
    "is possibly relevant but does not help answer the question.",
    "is irrelevant and does not help answer the question.",
    "contains incorrect information and does not help answer the question.",
};

std::vector<Document> slot_documents(const DefectiveContext& context) {
    std::vector<Document> docs;
    docs.reserve(context.slots.size());
    for (const ContextSlot& slot : context.slots) docs.push_back(slot.document);
    return docs;
}

}  // namespace

AssessmentLabel assessment_for(DefectType type) {
    switch (type) {
        case DefectType::kPositive: return AssessmentLabel::kHelps;
        case DefectType::kNoisy: return AssessmentLabel::kPossiblyRelevant;
        case DefectType::kIrrelevant: return AssessmentLabel::kIrrelevant;
        case DefectType::kCounterfactual: return AssessmentLabel::kIncorrect;
    }
    throw InputError("bad defect type");
}

DefectType defect_for(AssessmentLabel label) {
    switch (label) {
        case AssessmentLabel::kHelps: return DefectType::kPositive;
        case AssessmentLabel::kPossiblyRelevant: return DefectType::kNoisy;
        case AssessmentLabel::kIrrelevant: return DefectType::kIrrelevant;
        case AssessmentLabel::kIncorrect: return DefectType::kCounterfactual;
    }
    throw InputError("bad assessment label");
}

std::vector<AssessmentLabel> context_labels(const DefectiveContext& context) {
    std::vector<AssessmentLabel> labels;
    labels.reserve(context.slots.size());
    for (const ContextSlot& slot : context.slots) labels.push_back(assessment_for(slot.label));
    return labels;
}

std::string render_document(const Document& doc) {
    return doc.title + ". " + doc.body;
}

std::string render_doc_lines(const std::vector<Document>& docs) {
    std::string out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += "Doc " + std::to_string(i + 1) + ": " + render_document(docs[i]);
    }
    return out;
}

std::string render_dd_prompt(const DefectiveContext& context, std::string_view question) {
    if (context.slots.empty()) {
        throw InputError("render_dd_prompt: context has no slots");
    }
    return render_template(dd_input_template(),
                           {{"documents", render_doc_lines(slot_documents(context))},
                            {"question", question}});
}

std::string render_dd_target(const std::vector<AssessmentLabel>& labels) {
    if (labels.empty()) {
        throw InputError("render_dd_target: label list is empty");
    }
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += "Doc " + std::to_string(i + 1) + " ";
        out += kPhrases[static_cast<int>(labels[i]) - 1];
    }
    return out;
}

std::vector<AssessmentLabel> parse_dd_output(std::string_view text, std::size_t k) {
    if (k == 0) {
        throw InputError("parse_dd_output: k must be positive");
    }
    std::vector<std::optional<AssessmentLabel>> found(k);
    std::size_t recognized = 0;
    for (const std::string& raw : split_lines(text)) {
        const std::string line = strip(raw);
        if (line.empty()) continue;
        const std::string lower = to_lower_ascii(line);
        if (lower.rfind("doc ", 0) != 0) {
            throw ParseError("unparseable assessment line (missing \"Doc <i>\"): \"" + raw +
                             "\"");
        }
        std::size_t pos = 4;
        while (pos < lower.size() && lower[pos] == ' ') ++pos;
        std::size_t digits_end = pos;
        while (digits_end < lower.size() && lower[digits_end] >= '0' &&
               lower[digits_end] <= '9') {
            ++digits_end;
        }
        if (digits_end == pos) {
            throw ParseError("unparseable assessment line (missing doc index): \"" + raw + "\"");
        }
        const std::size_t index = std::stoul(lower.substr(pos, digits_end - pos));
        std::size_t phrase_begin = digits_end;
        while (phrase_begin < lower.size() && lower[phrase_begin] == ' ') ++phrase_begin;
        const std::string_view phrase = std::string_view(lower).substr(phrase_begin);

        std::optional<AssessmentLabel> label;
        for (int p = 0; p < 4; ++p) {
            if (phrase == kPhrases[p]) {
                label = static_cast<AssessmentLabel>(p + 1);
                break;
            }
        }
        if (!label.has_value()) {
            throw ParseError("doc " + std::to_string(index) +
                             ": unmatchable assessment phrase in line \"" + raw + "\"");
        }
        ++recognized;
        if (recognized > k) {
            throw ArityError("expected " + std::to_string(k) +
                             " assessment lines, found more");
        }
        if (index < 1 || index > k) {
            throw ParseError("doc index " + std::to_string(index) + " out of range 1.." +
                             std::to_string(k));
        }
        if (found[index - 1].has_value()) {
            throw ParseError("duplicate assessment for doc " + std::to_string(index));
        }
        found[index - 1] = label;
    }
    if (recognized != k) {
        throw ArityError("expected " + std::to_string(k) + " assessment lines, found " +
                         std::to_string(recognized));
    }
    std::vector<AssessmentLabel> labels;
    labels.reserve(k);
    for (const auto& slot : found) labels.push_back(*slot);  // complete by construction
    return labels;
}

std::string render_ue_prompt(const DefectiveContext& context, std::string_view question) {
    if (context.slots.empty()) {
        throw InputError("render_ue_prompt: context has no slots");
    }
    return render_template(ue_input_template(),
                           {{"documents", render_doc_lines(slot_documents(context))},
                            {"question", question}});
}

std::string render_wrong_answer_prompt(const std::vector<Document>& docs,
                                       std::string_view question,
                                       std::string_view correct_answer) {
    if (docs.empty()) {
        throw InputError("render_wrong_answer_prompt: document list is empty");
    }
    return render_template(wrong_answer_input_template(),
                           {{"documents", render_doc_lines(docs)},
                            {"question", question},
                            {"answer", correct_answer}});
}

std::string render_rewrite_prompt(const Document& doc, std::string_view correct_answer,
                                  std::string_view wrong_answer) {
    // body only: the reply replaces the stored body verbatim, and the title
    // is reattached whenever the rewritten document is rendered
    return render_template(rewrite_input_template(),
                           {{"correct_answer", correct_answer},
                            {"wrong_answer", wrong_answer},
                            {"document", doc.body}});
}

std::string_view dd_input_template() {
    return strip_final_newline(templates::kDefectsDetectionInput);
}

std::string_view ue_input_template() {
    return strip_final_newline(templates::kUtilityExtractionInput);
}

std::string_view wrong_answer_input_template() {
    return strip_final_newline(templates::kWrongAnswerInput);
}

std::string_view rewrite_input_template() {
    return strip_final_newline(templates::kRewriteInput);
}

}  // namespace ragstress
