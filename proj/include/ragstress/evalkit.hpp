#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ragstress/prompts.hpp"

namespace ragstress {

/// Open-domain-QA answer normalization: lowercase, delete ASCII
/// punctuation, drop "a"/"an"/"the" as whole tokens, squeeze whitespace.
std::string normalize_answer(std::string_view s);

/// 1.0 iff the normalized prediction equals some normalized gold.
double exact_match(std::string_view prediction, const std::vector<std::string>& golds);

/// Harmonic mean of multiset token precision/recall between normalized
/// prediction and gold, maximized over gold aliases. Both sides empty after
/// normalization scores 1, exactly one empty scores 0.
double token_f1(std::string_view prediction, const std::vector<std::string>& golds);

/// Whether normalize_answer(needle) occurs as a substring of
/// normalize_answer(haystack). Needles that normalize to "" never match.
bool contains_normalized(std::string_view haystack, std::string_view needle);

struct QueryScore {
    std::string query_id;
    double em = 0.0;
    double f1 = 0.0;
};

struct EvalOutcome {
    std::vector<QueryScore> per_query;
    double mean_em = 0.0;  // 0.0 when per_query is empty
    double mean_f1 = 0.0;
};

/// Score one prediction per query against its gold aliases. The three lists
/// are parallel; a length mismatch raises ArityError.
EvalOutcome score_answers(const std::vector<std::string>& query_ids,
                          const std::vector<std::string>& predictions,
                          const std::vector<std::vector<std::string>>& golds);

struct DetectionMetrics {
    /// confusion[g][p]: slots with gold label g+1 predicted as label p+1.
    std::array<std::array<std::int64_t, 4>, 4> confusion{};
    /// Diagonal over row sum; 0.0 for labels absent from the gold side.
    std::array<double, 4> per_class_accuracy{};
    std::int64_t total = 0;
    double overall_accuracy = 0.0;  // 0.0 when total is 0
};

/// Listwise detection confusion over parallel per-query label lists.
/// Outer or inner length mismatches raise ArityError.
DetectionMetrics dd_metrics(const std::vector<std::vector<AssessmentLabel>>& predicted,
                            const std::vector<std::vector<AssessmentLabel>>& gold);

struct SignificanceResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
    bool significant_at_005 = false;
};

/// Paired two-tailed Student t-test over equal-length samples (n >= 2).
/// All-zero differences give t = 0, p = 1; zero-variance nonzero
/// differences give t = +/-infinity, p = 0.
SignificanceResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1]; continued-fraction evaluation, well under 1e-9 absolute.
double reg_incomplete_beta(double a, double b, double x);

/// Two-tailed Student-t tail probability P(|T| >= |t|) at df >= 1.
double student_t_two_tailed_p(double t, int df);

}  // namespace ragstress
