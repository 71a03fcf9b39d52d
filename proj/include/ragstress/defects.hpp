#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragstress/cf_store.hpp"
#include "ragstress/corpus.hpp"
#include "ragstress/retrieval.hpp"
#include "ragstress/rng.hpp"

namespace ragstress {

/// Per-slot label. Positive means the original retrieved document survived.
enum class DefectType {
    kPositive,
    kNoisy,          // same query, sampled from ranks beyond the cutoff
    kIrrelevant,     // uniform corpus draw outside the query's retrieval list
    kCounterfactual  // rewrite of the original occupant with a wrong answer
};

enum class DefectMode { kNoisy, kIrrelevant, kCounterfactual, kMix };
enum class ReplacementScheme { kBernoulli, kExactCount };

std::string_view to_string(DefectType type);
std::string_view to_string(DefectMode mode);
std::string_view to_string(ReplacementScheme scheme);
DefectType defect_type_from_string(std::string_view s);
DefectMode defect_mode_from_string(std::string_view s);
ReplacementScheme scheme_from_string(std::string_view s);

struct DefectConfig {
    double tau = 0.0;
    DefectMode mode = DefectMode::kMix;
    int cutoff = 50;  // noisy documents come from ranks > cutoff
    int k = 5;
    uint64_t seed = 0;
    ReplacementScheme scheme = ReplacementScheme::kBernoulli;

    void validate() const;  // tau in [0,1], k >= 1, cutoff >= k
};

/// One slot of an injected context. provenance is machine-parseable:
///   "rank:<r>"       original document at rank r (Positive)
///   "tail_rank:<r>"  noisy replacement sampled at rank r > cutoff
///   "corpus_draw"    irrelevant replacement drawn from the corpus
///   "parent:<id>"    counterfactual rewrite of original document <id>
struct ContextSlot {
    Document document;
    DefectType label = DefectType::kPositive;
    std::string provenance;
};

struct DefectiveContext {
    std::string query_id;
    std::vector<ContextSlot> slots;
};

/// Decide which of the k slots get replaced and with which defect type.
/// nullopt means the slot keeps its original document.
///
/// bernoulli: each slot is replaced independently with probability tau;
/// exact_count: exactly lround(tau * k) slots, chosen uniformly without
/// replacement. Draws are consumed in a tau-independent pattern, so for a
/// fixed rng stream the replaced sets are nested as tau grows.
std::vector<std::optional<DefectType>> plan_replacements(int k, const DefectConfig& config,
                                                         Rng& rng);

/// Build the defective context for one query. `clean` must hold the top-k
/// documents in rank order. Noisy slots are drawn without replacement within
/// the query; irrelevant slots exclude the query's entire retrieval list plus
/// earlier irrelevant draws; counterfactual slots take the stored rewrite of
/// the original occupant. The rng stream is derived from
/// (config.seed, query_id), so per-query injection is order-independent.
DefectiveContext inject(const QueryInstance& query, const std::vector<Document>& clean,
                        const RetrievalList& list, const Corpus& corpus,
                        const CounterfactualStore* cf_store, const DefectConfig& config);

/// Convenience: resolve top-k documents from the record and corpus, then
/// inject.
DefectiveContext inject(const QueryRecord& record, const Corpus& corpus,
                        const CounterfactualStore* cf_store, const DefectConfig& config);

/// Doc ids whose slots inject() would fill with counterfactual rewrites
/// under this configuration, i.e. the rewrites the store must cover. Shares
/// the replacement plan with inject(), so the answer is exact.
std::vector<std::string> counterfactual_parents(const QueryRecord& record,
                                                const DefectConfig& config);

/// Round-half-away-from-zero replacement count used by the exact_count
/// scheme.
int exact_replacement_count(double tau, int k);

}  // namespace ragstress
