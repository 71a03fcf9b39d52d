#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ragstress/defects.hpp"
#include "ragstress/llm.hpp"
#include "ragstress/traingen.hpp"

namespace ragstress {

struct IngestOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path queries_path;
    std::filesystem::path out_path;
    int depth = 100;
};

/// Raw endpoint knobs as they arrive from flags/env/config.
struct EndpointOptions {
    std::string base_url = "http://localhost:8000/v1";
    std::string model;
    std::string api_key;
    double timeout_sec = 60.0;
    int max_retries = 3;
    int concurrency = 4;
    int backoff_ms = 500;

    EndpointConfig to_config() const;
};

struct BuildCfOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path run_path;
    std::filesystem::path store_path;  // loaded for resume, then rewritten
    int k = 5;
    int gen_retries = 3;
    double retry_temperature = 0.7;
    int max_tokens = 512;
    int jobs = 1;
    bool offline_stub = false;  // deterministic local generator, no HTTP
    EndpointOptions endpoint;
};

struct InjectOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path run_path;
    std::filesystem::path store_path;  // empty -> no counterfactual store
    std::filesystem::path out_path;
    DefectConfig config;
    int jobs = 1;
};

struct GenTrainOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path run_path;
    std::filesystem::path store_path;  // empty -> no counterfactual store
    std::filesystem::path out_dir;
    TrainGrid grid;
    double split_fraction = 0.1;
};

struct SweepOptions {
    std::filesystem::path corpus_path;
    std::filesystem::path run_path;
    std::filesystem::path store_path;  // empty -> no counterfactual store
    std::filesystem::path out_dir;
    std::vector<double> taus = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<DefectMode> modes = {DefectMode::kNoisy, DefectMode::kIrrelevant,
                                     DefectMode::kCounterfactual, DefectMode::kMix};
    int k = 5;
    int cutoff = 50;
    std::uint64_t seed = 0;
    ReplacementScheme scheme = ReplacementScheme::kBernoulli;
    std::string generator = "oracle";  // "oracle" or "endpoint"
    std::string label = "system";
    int max_tokens = 256;
    int jobs = 1;
    EndpointOptions endpoint;
};

struct ReportOptions {
    /// Sweep output directories (or their sweep.json manifests). The first
    /// one is the significance baseline.
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir;
};

// Each command reads/writes the files named in its options and logs a short
// summary; failures surface as ragstress::Error subclasses.
void cmd_ingest(const IngestOptions& opts, std::ostream& log);
void cmd_build_cf(const BuildCfOptions& opts, std::ostream& log);
void cmd_inject(const InjectOptions& opts, std::ostream& log);
void cmd_gen_train(const GenTrainOptions& opts, std::ostream& log);
void cmd_sweep(const SweepOptions& opts, std::ostream& log);
void cmd_report(const ReportOptions& opts, std::ostream& log);

}  // namespace ragstress
