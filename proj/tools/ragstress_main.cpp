#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ragstress/commands.hpp"
#include "ragstress/errors.hpp"

namespace {

const std::vector<std::string> kModeNames = {"noisy", "irrelevant", "counterfactual", "mix"};
const std::vector<std::string> kSchemeNames = {"bernoulli", "exact_count"};

std::vector<ragstress::DefectMode> to_modes(const std::vector<std::string>& names) {
    std::vector<ragstress::DefectMode> modes;
    modes.reserve(names.size());
    for (const std::string& name : names) {
        modes.push_back(ragstress::defect_mode_from_string(name));
    }
    return modes;
}

void add_endpoint_flags(CLI::App* cmd, ragstress::EndpointOptions* endpoint) {
    cmd->add_option("--endpoint-url", endpoint->base_url,
                    "Chat-completions base URL (scheme://host[:port][/prefix])")
        ->envname("RAGSTRESS_ENDPOINT_URL")
        ->capture_default_str();
    cmd->add_option("--model", endpoint->model, "Model name sent with each request")
        ->envname("RAGSTRESS_MODEL");
    cmd->add_option("--api-key", endpoint->api_key, "Bearer token, if the endpoint wants one")
        ->envname("RAGSTRESS_API_KEY");
    cmd->add_option("--timeout", endpoint->timeout_sec, "Per-request timeout, seconds")
        ->envname("RAGSTRESS_TIMEOUT")
        ->capture_default_str();
    cmd->add_option("--endpoint-retries", endpoint->max_retries,
                    "Retries after transport failures and 429/5xx statuses")
        ->envname("RAGSTRESS_ENDPOINT_RETRIES")
        ->capture_default_str();
    cmd->add_option("--endpoint-concurrency", endpoint->concurrency,
                    "Max requests in flight")
        ->envname("RAGSTRESS_ENDPOINT_CONCURRENCY")
        ->capture_default_str();
    cmd->add_option("--backoff-ms", endpoint->backoff_ms,
                    "First retry delay; doubles per retry")
        ->envname("RAGSTRESS_BACKOFF_MS")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-defect injection and robustness evaluation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ragstress 0.1.0");
    app.set_config("--config", "", "Read defaults from an INI/TOML file");

    // ingest ----------------------------------------------------------------
    struct {
        std::string corpus, queries, out;
        int depth = 100;
    } ingest;
    CLI::App* ingest_cmd =
        app.add_subcommand("ingest", "Index a TSV corpus and write a BM25 retrieval run");
    ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus TSV (id<TAB>text<TAB>title)")
        ->required();
    ingest_cmd
        ->add_option("--queries", ingest.queries,
                     "Queries JSON Lines: {\"query_id\", \"question\", \"answers\"}")
        ->required();
    ingest_cmd->add_option("--out", ingest.out, "Output run JSON Lines")->required();
    ingest_cmd->add_option("--depth", ingest.depth, "Documents retrieved per query")
        ->capture_default_str();
    ingest_cmd->callback([&]() {
        ragstress::IngestOptions opts;
        opts.corpus_path = ingest.corpus;
        opts.queries_path = ingest.queries;
        opts.out_path = ingest.out;
        opts.depth = ingest.depth;
        ragstress::cmd_ingest(opts, std::cout);
    });

    // build-cf --------------------------------------------------------------
    struct {
        std::string corpus, run, store;
        int k = 5;
        int gen_retries = 3;
        double retry_temperature = 0.7;
        int max_tokens = 512;
        int jobs = 1;
        bool offline_stub = false;
        ragstress::EndpointOptions endpoint;
    } build_cf;
    CLI::App* build_cf_cmd = app.add_subcommand(
        "build-cf", "Generate wrong answers and counterfactual rewrites for a run");
    build_cf_cmd->add_option("--corpus", build_cf.corpus, "Corpus TSV")->required();
    build_cf_cmd->add_option("--run", build_cf.run, "Retrieval run JSON Lines")->required();
    build_cf_cmd
        ->add_option("--store", build_cf.store,
                     "Counterfactual store JSON Lines (read for resume, then rewritten)")
        ->required();
    build_cf_cmd->add_option("--k", build_cf.k, "Rewrites per query (top-k documents)")
        ->capture_default_str();
    build_cf_cmd
        ->add_option("--gen-retries", build_cf.gen_retries,
                     "Extra attempts when validation rejects a reply")
        ->capture_default_str();
    build_cf_cmd
        ->add_option("--retry-temperature", build_cf.retry_temperature,
                     "Sampling temperature on those retries (first attempt uses 0)")
        ->capture_default_str();
    build_cf_cmd->add_option("--max-tokens", build_cf.max_tokens, "Completion budget per call")
        ->capture_default_str();
    build_cf_cmd->add_option("--jobs", build_cf.jobs, "Queries processed concurrently")
        ->capture_default_str();
    build_cf_cmd->add_flag("--offline-stub", build_cf.offline_stub,
                           "Use the deterministic local generator instead of HTTP");
    add_endpoint_flags(build_cf_cmd, &build_cf.endpoint);
    build_cf_cmd->callback([&]() {
        ragstress::BuildCfOptions opts;
        opts.corpus_path = build_cf.corpus;
        opts.run_path = build_cf.run;
        opts.store_path = build_cf.store;
        opts.k = build_cf.k;
        opts.gen_retries = build_cf.gen_retries;
        opts.retry_temperature = build_cf.retry_temperature;
        opts.max_tokens = build_cf.max_tokens;
        opts.jobs = build_cf.jobs;
        opts.offline_stub = build_cf.offline_stub;
        opts.endpoint = build_cf.endpoint;
        ragstress::cmd_build_cf(opts, std::cout);
    });

    // inject ----------------------------------------------------------------
    struct {
        std::string corpus, run, store, out;
        double tau = 0.0;
        std::string mode = "mix";
        int cutoff = 50;
        int k = 5;
        std::uint64_t seed = 0;
        std::string scheme = "bernoulli";
        int jobs = 1;
    } inject;
    CLI::App* inject_cmd =
        app.add_subcommand("inject", "Write defective contexts for every query in a run");
    inject_cmd->add_option("--corpus", inject.corpus, "Corpus TSV")->required();
    inject_cmd->add_option("--run", inject.run, "Retrieval run JSON Lines")->required();
    inject_cmd->add_option("--store", inject.store,
                           "Counterfactual store (required by counterfactual/mix slots)");
    inject_cmd->add_option("--out", inject.out, "Output contexts JSON Lines")->required();
    inject_cmd->add_option("--tau", inject.tau, "Replacement rate in [0, 1]")
        ->capture_default_str();
    inject_cmd->add_option("--mode", inject.mode, "Defect mode")
        ->check(CLI::IsMember(kModeNames))
        ->capture_default_str();
    inject_cmd->add_option("--cutoff", inject.cutoff, "Noisy documents come from ranks beyond this")
        ->capture_default_str();
    inject_cmd->add_option("--k", inject.k, "Context size")->capture_default_str();
    inject_cmd->add_option("--seed", inject.seed, "Base RNG seed")->capture_default_str();
    inject_cmd->add_option("--scheme", inject.scheme, "Replacement scheme")
        ->check(CLI::IsMember(kSchemeNames))
        ->capture_default_str();
    inject_cmd->add_option("--jobs", inject.jobs, "Queries processed concurrently")
        ->capture_default_str();
    inject_cmd->callback([&]() {
        ragstress::InjectOptions opts;
        opts.corpus_path = inject.corpus;
        opts.run_path = inject.run;
        opts.store_path = inject.store;
        opts.out_path = inject.out;
        opts.config.tau = inject.tau;
        opts.config.mode = ragstress::defect_mode_from_string(inject.mode);
        opts.config.cutoff = inject.cutoff;
        opts.config.k = inject.k;
        opts.config.seed = inject.seed;
        opts.config.scheme = ragstress::scheme_from_string(inject.scheme);
        opts.jobs = inject.jobs;
        ragstress::cmd_inject(opts, std::cout);
    });

    // gen-train -------------------------------------------------------------
    struct {
        std::string corpus, run, store, out_dir;
        std::vector<double> taus = {0.2, 0.4, 0.6, 0.8, 1.0};
        std::vector<std::string> modes = kModeNames;
        int k = 5;
        int cutoff = 50;
        std::string scheme = "bernoulli";
        std::uint64_t seed = 0;
        double split_fraction = 0.1;
    } gen_train;
    CLI::App* gen_train_cmd = app.add_subcommand(
        "gen-train", "Emit instruction-tuning data for the detection/extraction tasks");
    gen_train_cmd->add_option("--corpus", gen_train.corpus, "Corpus TSV")->required();
    gen_train_cmd->add_option("--run", gen_train.run, "Retrieval run JSON Lines")->required();
    gen_train_cmd->add_option("--store", gen_train.store, "Counterfactual store");
    gen_train_cmd->add_option("--out-dir", gen_train.out_dir, "Output directory")->required();
    gen_train_cmd
        ->add_option("--taus", gen_train.taus, "Tau pool sampled per query (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    gen_train_cmd
        ->add_option("--modes", gen_train.modes, "Mode pool sampled per query")
        ->delimiter(',')
        ->check(CLI::IsMember(kModeNames))
        ->capture_default_str();
    gen_train_cmd->add_option("--k", gen_train.k, "Context size")->capture_default_str();
    gen_train_cmd->add_option("--cutoff", gen_train.cutoff, "Noisy rank cutoff")
        ->capture_default_str();
    gen_train_cmd->add_option("--scheme", gen_train.scheme, "Replacement scheme")
        ->check(CLI::IsMember(kSchemeNames))
        ->capture_default_str();
    gen_train_cmd->add_option("--seed", gen_train.seed, "Base RNG seed")->capture_default_str();
    gen_train_cmd
        ->add_option("--split-fraction", gen_train.split_fraction,
                     "Share of queries held out for validation")
        ->capture_default_str();
    gen_train_cmd->callback([&]() {
        ragstress::GenTrainOptions opts;
        opts.corpus_path = gen_train.corpus;
        opts.run_path = gen_train.run;
        opts.store_path = gen_train.store;
        opts.out_dir = gen_train.out_dir;
        opts.grid.taus = gen_train.taus;
        opts.grid.modes = to_modes(gen_train.modes);
        opts.grid.k = gen_train.k;
        opts.grid.cutoff = gen_train.cutoff;
        opts.grid.scheme = ragstress::scheme_from_string(gen_train.scheme);
        opts.grid.seed = gen_train.seed;
        opts.split_fraction = gen_train.split_fraction;
        ragstress::cmd_gen_train(opts, std::cout);
    });

    // sweep -----------------------------------------------------------------
    struct {
        std::string corpus, run, store, out_dir;
        std::vector<double> taus = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
        std::vector<std::string> modes = kModeNames;
        int k = 5;
        int cutoff = 50;
        std::uint64_t seed = 0;
        std::string scheme = "bernoulli";
        std::string generator = "oracle";
        std::string label = "system";
        int max_tokens = 256;
        int jobs = 1;
        ragstress::EndpointOptions endpoint;
    } sweep;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "Inject, generate and score every (mode, tau) cell of a grid");
    sweep_cmd->add_option("--corpus", sweep.corpus, "Corpus TSV")->required();
    sweep_cmd->add_option("--run", sweep.run, "Retrieval run JSON Lines")->required();
    sweep_cmd->add_option("--store", sweep.store, "Counterfactual store");
    sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory")->required();
    sweep_cmd->add_option("--taus", sweep.taus, "Tau grid (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--modes", sweep.modes, "Mode grid")
        ->delimiter(',')
        ->check(CLI::IsMember(kModeNames))
        ->capture_default_str();
    sweep_cmd->add_option("--k", sweep.k, "Context size")->capture_default_str();
    sweep_cmd->add_option("--cutoff", sweep.cutoff, "Noisy rank cutoff")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "Base RNG seed")->capture_default_str();
    sweep_cmd->add_option("--scheme", sweep.scheme, "Replacement scheme")
        ->check(CLI::IsMember(kSchemeNames))
        ->capture_default_str();
    sweep_cmd->add_option("--generator", sweep.generator, "Answer source per context")
        ->check(CLI::IsMember({"oracle", "endpoint"}))
        ->capture_default_str();
    sweep_cmd->add_option("--label", sweep.label, "Name for this system in reports")
        ->capture_default_str();
    sweep_cmd->add_option("--max-tokens", sweep.max_tokens, "Completion budget per call")
        ->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Queries processed concurrently")
        ->capture_default_str();
    add_endpoint_flags(sweep_cmd, &sweep.endpoint);
    sweep_cmd->callback([&]() {
        ragstress::SweepOptions opts;
        opts.corpus_path = sweep.corpus;
        opts.run_path = sweep.run;
        opts.store_path = sweep.store;
        opts.out_dir = sweep.out_dir;
        opts.taus = sweep.taus;
        opts.modes = to_modes(sweep.modes);
        opts.k = sweep.k;
        opts.cutoff = sweep.cutoff;
        opts.seed = sweep.seed;
        opts.scheme = ragstress::scheme_from_string(sweep.scheme);
        opts.generator = sweep.generator;
        opts.label = sweep.label;
        opts.max_tokens = sweep.max_tokens;
        opts.jobs = sweep.jobs;
        opts.endpoint = sweep.endpoint;
        ragstress::cmd_sweep(opts, std::cout);
    });

    // report ----------------------------------------------------------------
    struct {
        std::vector<std::string> inputs;
        std::string out_dir;
    } report;
    CLI::App* report_cmd = app.add_subcommand(
        "report", "Summarize sweep results: tables, curves, tradeoffs, significance");
    report_cmd
        ->add_option("inputs", report.inputs,
                     "Sweep output directories (first one is the baseline)")
        ->required();
    report_cmd->add_option("--out-dir", report.out_dir, "Output directory")->required();
    report_cmd->callback([&]() {
        ragstress::ReportOptions opts;
        for (const std::string& input : report.inputs) opts.inputs.emplace_back(input);
        opts.out_dir = report.out_dir;
        ragstress::cmd_report(opts, std::cout);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ragstress::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
