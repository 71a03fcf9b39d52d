#include "ragstress/traingen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>
#include <utility>

#include "ragstress/errors.hpp"
#include "ragstress/prompts.hpp"
#include "ragstress/rng.hpp"

namespace ragstress {

namespace {

std::uint64_t task_seed(std::uint64_t seed, TaskKind task) {
    return mix64(seed ^ fnv1a64(task == TaskKind::kDefectsDetection
                                    ? "train/defects_detection"
                                    : "train/utility_extraction"));
}

bool needs_counterfactuals(const DefectConfig& config) {
    return (config.mode == DefectMode::kCounterfactual || config.mode == DefectMode::kMix) &&
           config.tau > 0.0;
}

TrainingRecord make_record(const QueryRecord& record, const Corpus& corpus,
                           const CounterfactualStore* cf_store, const DefectConfig& config,
                           TaskKind task) {
    const DefectiveContext context = inject(record, corpus, cf_store, config);
    TrainingRecord out;
    out.task = task;
    out.query_id = record.query.query_id;
    out.tau = config.tau;
    out.mode = config.mode;
    if (task == TaskKind::kDefectsDetection) {
        out.instruction_input = render_dd_prompt(context, record.query.question);
        out.target_output = render_dd_target(context_labels(context));
    } else {
        out.instruction_input = render_ue_prompt(context, record.query.question);
        out.target_output = record.query.gold_answers.front();
    }
    return out;
}

}  // namespace

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::kDefectsDetection: return "defects_detection";
        case TaskKind::kUtilityExtraction: return "utility_extraction";
    }
    return "?";
}

TaskKind task_from_string(std::string_view s) {
    if (s == "defects_detection") return TaskKind::kDefectsDetection;
    if (s == "utility_extraction") return TaskKind::kUtilityExtraction;
    throw InputError("unknown task: \"" + std::string(s) +
                     "\" (expected defects_detection or utility_extraction)");
}

void TrainGrid::validate() const {
    if (taus.empty()) {
        throw InputError("training grid has no tau values");
    }
    for (double tau : taus) {
        if (!(tau >= 0.0 && tau <= 1.0)) {
            throw InputError("training grid tau must lie in [0, 1]");
        }
    }
    if (modes.empty()) {
        throw InputError("training grid has no modes");
    }
}

TrainingSet make_training_set(const Run& run, const Corpus& corpus,
                              const CounterfactualStore* cf_store, const TrainGrid& grid,
                              double split_fraction) {
    grid.validate();
    if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) {
        throw InputError("split fraction must lie in [0, 1]");
    }
    const std::vector<QueryRecord>& records = run.records();

    // Sample every query's per-task configuration first; both the coverage
    // check and the emission pass reuse these.
    struct SampledConfigs {
        DefectConfig dd;
        DefectConfig ue;
    };
    std::vector<SampledConfigs> sampled(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        Rng rng = derive_rng(grid.seed, "traingen/" + records[i].query.query_id);
        const auto pick = [&](TaskKind task) {
            DefectConfig config;
            config.mode = grid.modes[rng.below(grid.modes.size())];
            config.tau = grid.taus[rng.below(grid.taus.size())];
            config.cutoff = grid.cutoff;
            config.k = grid.k;
            config.scheme = grid.scheme;
            config.seed = task_seed(grid.seed, task);
            return config;
        };
        sampled[i].dd = pick(TaskKind::kDefectsDetection);
        sampled[i].ue = pick(TaskKind::kUtilityExtraction);
    }

    std::vector<std::string> missing;
    std::unordered_set<std::string> missing_seen;
    const auto check_coverage = [&](const QueryRecord& record, const DefectConfig& config) {
        if (!needs_counterfactuals(config)) return;
        for (const std::string& parent : counterfactual_parents(record, config)) {
            const std::string& query_id = record.query.query_id;
            if (cf_store != nullptr && cf_store->has_rewrite(query_id, parent)) continue;
            if (missing_seen.insert(query_id + '\x1f' + parent).second) {
                missing.push_back("query " + query_id + ", document " + parent);
            }
        }
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        check_coverage(records[i], sampled[i].dd);
        check_coverage(records[i], sampled[i].ue);
    }
    if (!missing.empty()) {
        constexpr std::size_t kListed = 20;
        std::string message = "counterfactual store is missing " +
                              std::to_string(missing.size()) + " rewrite(s): ";
        for (std::size_t i = 0; i < missing.size() && i < kListed; ++i) {
            if (i > 0) message += "; ";
            message += missing[i];
        }
        if (missing.size() > kListed) {
            message += "; and " + std::to_string(missing.size() - kListed) + " more";
        }
        throw DependencyError(message);
    }

    // Validation takes the queries with the smallest id hashes, so the split
    // is exact and independent of record order.
    const auto n_validation = static_cast<std::size_t>(
        std::lround(split_fraction * static_cast<double>(records.size())));
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::uint64_t ha = mix64(fnv1a64(records[a].query.query_id));
        const std::uint64_t hb = mix64(fnv1a64(records[b].query.query_id));
        if (ha != hb) return ha < hb;
        return records[a].query.query_id < records[b].query.query_id;
    });
    std::vector<bool> in_validation(records.size(), false);
    for (std::size_t i = 0; i < n_validation; ++i) in_validation[order[i]] = true;

    TrainingSet out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<TrainingRecord>& bucket = in_validation[i] ? out.validation : out.train;
        bucket.push_back(make_record(records[i], corpus, cf_store, sampled[i].dd,
                                     TaskKind::kDefectsDetection));
        bucket.push_back(make_record(records[i], corpus, cf_store, sampled[i].ue,
                                     TaskKind::kUtilityExtraction));
    }
    return out;
}

Json training_record_json(const TrainingRecord& record) {
    Json meta;
    meta["task"] = std::string(to_string(record.task));
    meta["query_id"] = record.query_id;
    meta["tau"] = record.tau;
    meta["mode"] = std::string(to_string(record.mode));
    Json row;
    row["instruction"] = "";
    row["input"] = record.instruction_input;
    row["output"] = record.target_output;
    row["meta"] = std::move(meta);
    return row;
}

void save_training_records(const std::vector<TrainingRecord>& records,
                           const std::filesystem::path& path) {
    JsonlWriter writer(path);
    for (const TrainingRecord& record : records) {
        writer.write(training_record_json(record));
    }
    writer.close();
}

}  // namespace ragstress
