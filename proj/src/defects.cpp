#include "ragstress/defects.hpp"

#include <cmath>
#include <unordered_set>

#include "ragstress/errors.hpp"

namespace ragstress {

std::string_view to_string(DefectType type) {
    switch (type) {
        case DefectType::kPositive: return "positive";
        case DefectType::kNoisy: return "noisy";
        case DefectType::kIrrelevant: return "irrelevant";
        case DefectType::kCounterfactual: return "counterfactual";
    }
    return "?";
}

std::string_view to_string(DefectMode mode) {
    switch (mode) {
        case DefectMode::kNoisy: return "noisy";
        case DefectMode::kIrrelevant: return "irrelevant";
        case DefectMode::kCounterfactual: return "counterfactual";
        case DefectMode::kMix: return "mix";
    }
    return "?";
}

std::string_view to_string(ReplacementScheme scheme) {
    switch (scheme) {
        case ReplacementScheme::kBernoulli: return "bernoulli";
        case ReplacementScheme::kExactCount: return "exact_count";
    }
    return "?";
}

DefectType defect_type_from_string(std::string_view s) {
    if (s == "positive") return DefectType::kPositive;
    if (s == "noisy") return DefectType::kNoisy;
    if (s == "irrelevant") return DefectType::kIrrelevant;
    if (s == "counterfactual") return DefectType::kCounterfactual;
    throw InputError("unknown defect type: \"" + std::string(s) + "\"");
}

DefectMode defect_mode_from_string(std::string_view s) {
    if (s == "noisy") return DefectMode::kNoisy;
    if (s == "irrelevant") return DefectMode::kIrrelevant;
    if (s == "counterfactual") return DefectMode::kCounterfactual;
    if (s == "mix") return DefectMode::kMix;
    throw InputError("unknown defect mode: \"" + std::string(s) +
                     "\" (expected noisy, irrelevant, counterfactual, or mix)");
}

ReplacementScheme scheme_from_string(std::string_view s) {
    if (s == "bernoulli") return ReplacementScheme::kBernoulli;
    if (s == "exact_count") return ReplacementScheme::kExactCount;
    throw InputError("unknown replacement scheme: \"" + std::string(s) +
                     "\" (expected bernoulli or exact_count)");
}

void DefectConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw InputError("tau must lie in [0, 1]");
    }
    if (k < 1) {
        throw InputError("k must be >= 1");
    }
    if (cutoff < k) {
        throw InputError("cutoff must be >= k (noisy documents come from below the top-k)");
    }
}

int exact_replacement_count(double tau, int k) {
    return static_cast<int>(std::lround(tau * static_cast<double>(k)));
}

std::vector<std::optional<DefectType>> plan_replacements(int k, const DefectConfig& config,
                                                         Rng& rng) {
    config.validate();
    std::vector<bool> replaced(static_cast<std::size_t>(k), false);
    if (config.scheme == ReplacementScheme::kBernoulli) {
        for (int i = 0; i < k; ++i) {
            replaced[static_cast<std::size_t>(i)] = rng.next_unit() < config.tau;
        }
    } else {
        // Full shuffle regardless of the count keeps the draw pattern
        // tau-independent; the first m positions of a Fisher-Yates pass
        // depend only on the first m draws, so replaced sets nest as tau
        // grows on a fixed stream.
        std::vector<int> order(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
        rng.shuffle(order);
        const int count = exact_replacement_count(config.tau, k);
        for (int i = 0; i < count; ++i) {
            replaced[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
        }
    }

    std::vector<std::optional<DefectType>> plan(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        if (!replaced[static_cast<std::size_t>(i)]) continue;
        DefectType type;
        switch (config.mode) {
            case DefectMode::kNoisy: type = DefectType::kNoisy; break;
            case DefectMode::kIrrelevant: type = DefectType::kIrrelevant; break;
            case DefectMode::kCounterfactual: type = DefectType::kCounterfactual; break;
            case DefectMode::kMix: {
                constexpr DefectType kMixTypes[3] = {DefectType::kNoisy, DefectType::kIrrelevant,
                                                     DefectType::kCounterfactual};
                type = kMixTypes[rng.below(3)];
                break;
            }
            default: throw InputError("bad defect mode");
        }
        plan[static_cast<std::size_t>(i)] = type;
    }
    return plan;
}

namespace {

const Document& draw_noisy(const RetrievalList& list, int cutoff, Rng& rng,
                           const Corpus& corpus,
                           std::unordered_set<std::string>& used, int* rank_out) {
    const auto tail_begin = static_cast<std::size_t>(cutoff);
    if (tail_begin >= list.entries.size()) {
        throw ExhaustedError("noisy sampler: query " + list.query_id +
                             " has no entry ranked beyond " + std::to_string(cutoff));
    }
    std::vector<const RankedEntry*> remaining;
    remaining.reserve(list.entries.size() - tail_begin);
    for (std::size_t i = tail_begin; i < list.entries.size(); ++i) {
        if (used.find(list.entries[i].doc_id) == used.end()) {
            remaining.push_back(&list.entries[i]);
        }
    }
    if (remaining.empty()) {
        throw ExhaustedError("noisy sampler: query " + list.query_id +
                             " exhausted its tail beyond rank " + std::to_string(cutoff));
    }
    const RankedEntry* pick = remaining[rng.below(remaining.size())];
    used.insert(pick->doc_id);
    *rank_out = pick->rank;
    return corpus.get(pick->doc_id);
}

}  // namespace

DefectiveContext inject(const QueryInstance& query, const std::vector<Document>& clean,
                        const RetrievalList& list, const Corpus& corpus,
                        const CounterfactualStore* cf_store, const DefectConfig& config) {
    config.validate();
    if (clean.size() != static_cast<std::size_t>(config.k)) {
        throw InputError("inject: query " + query.query_id + " clean context has " +
                         std::to_string(clean.size()) + " documents, expected k=" +
                         std::to_string(config.k));
    }

    Rng rng = derive_rng(config.seed, query.query_id);
    const auto plan = plan_replacements(config.k, config, rng);

    std::unordered_set<std::string> run_ids;
    for (const RankedEntry& entry : list.entries) run_ids.insert(entry.doc_id);
    std::unordered_set<std::string> used_noisy;
    std::unordered_set<std::string> irrelevant_exclude = run_ids;

    DefectiveContext context;
    context.query_id = query.query_id;
    context.slots.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const Document& original = clean[i];
        ContextSlot slot;
        if (!plan[i].has_value()) {
            slot.document = original;
            slot.label = DefectType::kPositive;
            slot.provenance = "rank:" + std::to_string(i + 1);
        } else {
            switch (*plan[i]) {
                case DefectType::kNoisy: {
                    int rank = 0;
                    slot.document = draw_noisy(list, config.cutoff, rng, corpus, used_noisy, &rank);
                    slot.label = DefectType::kNoisy;
                    slot.provenance = "tail_rank:" + std::to_string(rank);
                    break;
                }
                case DefectType::kIrrelevant: {
                    slot.document = corpus.sample_uniform(rng, irrelevant_exclude);
                    irrelevant_exclude.insert(slot.document.doc_id);
                    slot.label = DefectType::kIrrelevant;
                    slot.provenance = "corpus_draw";
                    break;
                }
                case DefectType::kCounterfactual: {
                    if (cf_store == nullptr) {
                        throw DependencyError(
                            "counterfactual rewrite required but no store was provided "
                            "(query " + query.query_id + ", document " + original.doc_id + ")");
                    }
                    const std::string* body = cf_store->find_rewrite(query.query_id,
                                                                     original.doc_id);
                    if (body == nullptr) {
                        throw DependencyError("missing counterfactual rewrite for query " +
                                              query.query_id + ", document " + original.doc_id);
                    }
                    slot.document = Document{original.doc_id, original.title, *body};
                    slot.label = DefectType::kCounterfactual;
                    slot.provenance = "parent:" + original.doc_id;
                    break;
                }
                default:
                    throw InputError("inject: plan produced a positive replacement");
            }
        }
        context.slots.push_back(std::move(slot));
    }
    return context;
}

DefectiveContext inject(const QueryRecord& record, const Corpus& corpus,
                        const CounterfactualStore* cf_store, const DefectConfig& config) {
    return inject(record.query, top_k_documents(record, corpus, config.k), record.list, corpus,
                  cf_store, config);
}

std::vector<std::string> counterfactual_parents(const QueryRecord& record,
                                                const DefectConfig& config) {
    config.validate();
    const std::vector<std::string> ids =
        top_k(record.list, static_cast<std::size_t>(config.k));
    Rng rng = derive_rng(config.seed, record.query.query_id);
    const auto plan = plan_replacements(config.k, config, rng);
    std::vector<std::string> parents;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (plan[i].has_value() && *plan[i] == DefectType::kCounterfactual) {
            parents.push_back(ids[i]);
        }
    }
    return parents;
}

}  // namespace ragstress
