#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ragstress/cf_store.hpp"
#include "ragstress/corpus.hpp"
#include "ragstress/defects.hpp"
#include "ragstress/io.hpp"
#include "ragstress/retrieval.hpp"

namespace ragstress {

enum class TaskKind { kDefectsDetection, kUtilityExtraction };

std::string_view to_string(TaskKind task);
TaskKind task_from_string(std::string_view s);

struct TrainingRecord {
    TaskKind task = TaskKind::kDefectsDetection;
    std::string instruction_input;
    std::string target_output;
    std::string query_id;
    double tau = 0.0;
    DefectMode mode = DefectMode::kMix;
};

/// The pool each query samples its per-task (mode, tau) from.
struct TrainGrid {
    std::vector<double> taus = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<DefectMode> modes = {DefectMode::kNoisy, DefectMode::kIrrelevant,
                                     DefectMode::kCounterfactual, DefectMode::kMix};
    int k = 5;
    int cutoff = 50;
    ReplacementScheme scheme = ReplacementScheme::kBernoulli;
    std::uint64_t seed = 0;

    void validate() const;  // taus non-empty within [0,1]; modes non-empty
};

struct TrainingSet {
    std::vector<TrainingRecord> train;
    std::vector<TrainingRecord> validation;
};

/// Emit one detection record and one extraction record per query, each under
/// an independently sampled (mode, tau) from the grid. The validation split
/// takes the lround(split_fraction * n) queries with the smallest query-id
/// hashes, so membership is a pure function of the id set. Counterfactual
/// coverage is checked up front; missing (query, doc) pairs raise
/// DependencyError listing them all.
TrainingSet make_training_set(const Run& run, const Corpus& corpus,
                              const CounterfactualStore* cf_store, const TrainGrid& grid,
                              double split_fraction);

/// Instruction-tuning row: {"instruction": "", "input", "output", "meta"}.
Json training_record_json(const TrainingRecord& record);

void save_training_records(const std::vector<TrainingRecord>& records,
                           const std::filesystem::path& path);

}  // namespace ragstress
