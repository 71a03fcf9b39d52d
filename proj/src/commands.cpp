#include "ragstress/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <utility>

#include "ragstress/cf_gen.hpp"
#include "ragstress/errors.hpp"
#include "ragstress/evalkit.hpp"
#include "ragstress/io.hpp"
#include "ragstress/prompts.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

/// fn(0..n-1) on a small worker pool; any scheduling, same effects, since
/// every call writes only its own index.
void run_indexed(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string fmt_tau(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", tau);
    return buf;
}

/// Shortest round-trip decimal form, identical to the JSON serialization.
std::string fmt_number(double x) { return Json(x).dump(); }

std::string fmt_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    quoted.push_back('"');
    return quoted;
}

void ensure_parent_dir(const std::filesystem::path& path) {
    const std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

QueryInstance query_from_json(const Json& j, std::size_t line_no,
                              const std::filesystem::path& path) {
    try {
        QueryInstance query;
        query.query_id = j.at("query_id").get<std::string>();
        query.question = j.at("question").get<std::string>();
        query.gold_answers = j.at("answers").get<std::vector<std::string>>();
        return query;
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad query record: " + e.what());
    }
}

std::optional<CounterfactualStore> maybe_load_store(const std::filesystem::path& path) {
    if (path.empty()) return std::nullopt;
    return CounterfactualStore::load(path);
}

Json context_json(const DefectiveContext& context) {
    Json slots = Json::array();
    for (const ContextSlot& slot : context.slots) {
        slots.push_back(Json{{"doc_id", slot.document.doc_id},
                             {"title", slot.document.title},
                             {"text", slot.document.body},
                             {"label", std::string(to_string(slot.label))},
                             {"provenance", slot.provenance}});
    }
    return Json{{"query_id", context.query_id}, {"slots", std::move(slots)}};
}

Json parse_json_file(const std::filesystem::path& path) {
    const Json parsed = Json::parse(read_file(path), nullptr, false);
    if (parsed.is_discarded()) {
        throw FormatError(path.string() + ": not valid JSON");
    }
    return parsed;
}

}  // namespace

EndpointConfig EndpointOptions::to_config() const {
    EndpointConfig config;
    config.base_url = base_url;
    config.model_name = model;
    config.api_key = api_key;
    config.timeout_sec = timeout_sec;
    config.max_retries = max_retries;
    config.concurrency_limit = concurrency;
    config.backoff_ms = backoff_ms;
    return config;
}

void cmd_ingest(const IngestOptions& opts, std::ostream& log) {
    if (opts.depth < 1) {
        throw InputError("retrieval depth must be >= 1");
    }
    const Corpus corpus = Corpus::load_tsv(opts.corpus_path);
    if (corpus.size() == 0) {
        throw InputError("cannot build a retrieval run over an empty corpus (" +
                         opts.corpus_path.string() + ")");
    }
    const Bm25Index index(corpus);
    Run run;
    for_each_jsonl(opts.queries_path, [&](std::size_t line_no, const Json& j) {
        const QueryInstance query = query_from_json(j, line_no, opts.queries_path);
        try {
            run.add({query, index.search(query.question,
                                         static_cast<std::size_t>(opts.depth),
                                         query.query_id)});
        } catch (const Error& e) {
            throw InputError(opts.queries_path.string() + ":" + std::to_string(line_no) +
                             ": " + e.what());
        }
    });
    ensure_parent_dir(opts.out_path);
    run.save(opts.out_path);
    log << "indexed " << corpus.size() << " documents; wrote " << run.size()
        << " retrieval lists (depth " << opts.depth << ") to " << opts.out_path.string()
        << "\n";
}

void cmd_build_cf(const BuildCfOptions& opts, std::ostream& log) {
    const Corpus corpus = Corpus::load_tsv(opts.corpus_path);
    const Run run = Run::load(opts.run_path);
    CounterfactualStore store = CounterfactualStore::load_or_empty(opts.store_path);

    CfGenConfig config;
    config.k = opts.k;
    config.max_retries = opts.gen_retries;
    config.retry_temperature = opts.retry_temperature;
    config.max_tokens = opts.max_tokens;
    config.jobs = opts.jobs;

    std::unique_ptr<ChatEndpoint> endpoint;
    if (opts.offline_stub) {
        endpoint = std::make_unique<OfflineStubEndpoint>();
    } else {
        endpoint = std::make_unique<HttpEndpoint>(opts.endpoint.to_config());
    }

    const BuildReport report = build_store(run, corpus, *endpoint, store, config);
    ensure_parent_dir(opts.store_path);
    store.save(opts.store_path);

    const std::filesystem::path failures_path(opts.store_path.string() + ".failures.jsonl");
    if (report.failures.empty()) {
        std::filesystem::remove(failures_path);
    } else {
        JsonlWriter writer(failures_path);
        for (const CfFailure& failure : report.failures) {
            writer.write(Json{{"query_id", failure.query_id},
                              {"doc_id", failure.doc_id},
                              {"reason", failure.reason}});
        }
        writer.close();
    }

    log << "stored " << report.pairs_completed << " new rewrites in "
        << opts.store_path.string() << " (" << report.pairs_skipped
        << " already present, " << report.calls_issued << " chat calls, "
        << report.failures.size() << " failures)\n";
    if (!report.failures.empty()) {
        log << "failure details: " << failures_path.string() << "\n";
    }
}

void cmd_inject(const InjectOptions& opts, std::ostream& log) {
    opts.config.validate();
    const Corpus corpus = Corpus::load_tsv(opts.corpus_path);
    const Run run = Run::load(opts.run_path);
    const std::optional<CounterfactualStore> store = maybe_load_store(opts.store_path);
    const CounterfactualStore* store_ptr = store ? &*store : nullptr;

    const std::vector<QueryRecord>& records = run.records();
    std::vector<Json> rows(records.size());
    run_indexed(opts.jobs, records.size(), [&](std::size_t i) {
        rows[i] = context_json(inject(records[i], corpus, store_ptr, opts.config));
    });

    ensure_parent_dir(opts.out_path);
    JsonlWriter writer(opts.out_path);
    for (const Json& row : rows) writer.write(row);
    writer.close();
    log << "injected " << records.size() << " contexts (mode "
        << to_string(opts.config.mode) << ", tau " << fmt_tau(opts.config.tau) << ", scheme "
        << to_string(opts.config.scheme) << ") to " << opts.out_path.string() << "\n";
}

void cmd_gen_train(const GenTrainOptions& opts, std::ostream& log) {
    const Corpus corpus = Corpus::load_tsv(opts.corpus_path);
    const Run run = Run::load(opts.run_path);
    const std::optional<CounterfactualStore> store = maybe_load_store(opts.store_path);

    const TrainingSet set = make_training_set(run, corpus, store ? &*store : nullptr,
                                              opts.grid, opts.split_fraction);
    std::filesystem::create_directories(opts.out_dir);
    save_training_records(set.train, opts.out_dir / "train.jsonl");
    save_training_records(set.validation, opts.out_dir / "validation.jsonl");
    log << "wrote " << set.train.size() << " training and " << set.validation.size()
        << " validation records to " << opts.out_dir.string() << "\n";
}

void cmd_sweep(const SweepOptions& opts, std::ostream& log) {
    if (opts.taus.empty()) {
        throw InputError("sweep needs at least one tau");
    }
    for (double tau : opts.taus) {
        if (!(tau >= 0.0 && tau <= 1.0)) {
            throw InputError("sweep tau must lie in [0, 1]");
        }
    }
    if (opts.modes.empty()) {
        throw InputError("sweep needs at least one mode");
    }
    if (opts.generator != "oracle" && opts.generator != "endpoint") {
        throw InputError("unknown generator \"" + opts.generator +
                         "\" (expected oracle or endpoint)");
    }
    if (opts.label.empty()) {
        throw InputError("sweep label must be non-empty");
    }

    const Corpus corpus = Corpus::load_tsv(opts.corpus_path);
    const Run run = Run::load(opts.run_path);
    const std::optional<CounterfactualStore> store = maybe_load_store(opts.store_path);
    const CounterfactualStore* store_ptr = store ? &*store : nullptr;

    std::unique_ptr<HttpEndpoint> http;
    if (opts.generator == "endpoint") {
        http = std::make_unique<HttpEndpoint>(opts.endpoint.to_config());
    }
    const OracleGenerator oracle(store_ptr);

    std::filesystem::create_directories(opts.out_dir);
    const std::vector<QueryRecord>& records = run.records();

    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> golds;
    ids.reserve(records.size());
    golds.reserve(records.size());
    for (const QueryRecord& record : records) {
        ids.push_back(record.query.query_id);
        golds.push_back(record.query.gold_answers);
    }

    Json cell_files = Json::array();
    for (DefectMode mode : opts.modes) {
        for (double tau : opts.taus) {
            DefectConfig config;
            config.tau = tau;
            config.mode = mode;
            config.cutoff = opts.cutoff;
            config.k = opts.k;
            config.seed = opts.seed;
            config.scheme = opts.scheme;
            config.validate();

            std::vector<std::string> predictions(records.size());
            std::vector<std::string> failures(records.size());
            run_indexed(opts.jobs, records.size(), [&](std::size_t i) {
                try {
                    const DefectiveContext context =
                        inject(records[i], corpus, store_ptr, config);
                    if (http) {
                        predictions[i] = strip(http->complete(ChatRequest::user(
                            render_ue_prompt(context, records[i].query.question), 0.0,
                            opts.max_tokens)));
                    } else {
                        predictions[i] = oracle.answer(context, records[i].query);
                    }
                } catch (const Error& e) {
                    predictions[i].clear();  // scored as a miss, not fatal
                    failures[i] = e.what();
                }
            });

            const EvalOutcome outcome = score_answers(ids, predictions, golds);

            Json per_query = Json::array();
            for (std::size_t i = 0; i < outcome.per_query.size(); ++i) {
                Json row = Json{{"query_id", outcome.per_query[i].query_id},
                                {"em", outcome.per_query[i].em},
                                {"f1", outcome.per_query[i].f1},
                                {"prediction", predictions[i]}};
                if (!failures[i].empty()) row["error"] = failures[i];
                per_query.push_back(std::move(row));
            }
            Json cell;
            cell["label"] = opts.label;
            cell["generator"] = opts.generator;
            cell["mode"] = std::string(to_string(mode));
            cell["tau"] = tau;
            cell["k"] = opts.k;
            cell["cutoff"] = opts.cutoff;
            cell["seed"] = opts.seed;
            cell["scheme"] = std::string(to_string(opts.scheme));
            cell["n"] = outcome.per_query.size();
            cell["mean_em"] = outcome.mean_em;
            cell["mean_f1"] = outcome.mean_f1;
            cell["per_query"] = std::move(per_query);

            const std::string stem = std::string(to_string(mode)) + "_tau" + fmt_tau(tau);
            write_file(opts.out_dir / (stem + ".json"), cell.dump(2) + "\n");

            std::string csv = "query_id,em,f1\n";
            for (const QueryScore& score : outcome.per_query) {
                csv += csv_field(score.query_id) + "," + fmt_number(score.em) + "," +
                       fmt_number(score.f1) + "\n";
            }
            write_file(opts.out_dir / (stem + ".csv"), csv);
            cell_files.push_back(stem + ".json");

            log << opts.label << " " << to_string(mode) << " tau=" << fmt_tau(tau)
                << ": EM " << fmt_number(outcome.mean_em) << ", F1 "
                << fmt_number(outcome.mean_f1) << "\n";
        }
    }

    Json taus_json = Json::array();
    for (double tau : opts.taus) taus_json.push_back(tau);
    Json modes_json = Json::array();
    for (DefectMode mode : opts.modes) modes_json.push_back(std::string(to_string(mode)));
    Json manifest;
    manifest["label"] = opts.label;
    manifest["generator"] = opts.generator;
    manifest["config"] = Json{{"k", opts.k},
                              {"cutoff", opts.cutoff},
                              {"seed", opts.seed},
                              {"scheme", std::string(to_string(opts.scheme))},
                              {"taus", std::move(taus_json)},
                              {"modes", std::move(modes_json)}};
    manifest["cells"] = std::move(cell_files);
    write_file(opts.out_dir / "sweep.json", manifest.dump(2) + "\n");
}

namespace {

struct LoadedCell {
    std::string mode;
    double tau = 0.0;
    std::string tau_key;
    double mean_em = 0.0;
    double mean_f1 = 0.0;
    std::vector<std::string> query_ids;
    std::vector<double> em;
    std::vector<double> f1;
};

struct LoadedSystem {
    std::string label;
    std::vector<LoadedCell> cells;  // manifest order
    std::map<std::pair<std::string, std::string>, std::size_t> by_key;

    const LoadedCell* find(const std::string& mode, const std::string& tau_key) const {
        const auto it = by_key.find({mode, tau_key});
        return it == by_key.end() ? nullptr : &cells[it->second];
    }
};

LoadedSystem load_system(const std::filesystem::path& input) {
    std::filesystem::path manifest_path = input;
    if (std::filesystem::is_directory(input)) manifest_path = input / "sweep.json";
    const Json manifest = parse_json_file(manifest_path);
    LoadedSystem system;
    try {
        system.label = manifest.at("label").get<std::string>();
        const std::filesystem::path base = manifest_path.parent_path();
        for (const Json& name : manifest.at("cells")) {
            const std::filesystem::path cell_path = base / name.get<std::string>();
            const Json cell = parse_json_file(cell_path);
            LoadedCell loaded;
            loaded.mode = cell.at("mode").get<std::string>();
            loaded.tau = cell.at("tau").get<double>();
            loaded.tau_key = fmt_tau(loaded.tau);
            loaded.mean_em = cell.at("mean_em").get<double>();
            loaded.mean_f1 = cell.at("mean_f1").get<double>();
            for (const Json& row : cell.at("per_query")) {
                loaded.query_ids.push_back(row.at("query_id").get<std::string>());
                loaded.em.push_back(row.at("em").get<double>());
                loaded.f1.push_back(row.at("f1").get<double>());
            }
            const auto key = std::make_pair(loaded.mode, loaded.tau_key);
            if (!system.by_key.emplace(key, system.cells.size()).second) {
                throw FormatError(cell_path.string() + ": duplicate cell " + loaded.mode +
                                  " tau=" + loaded.tau_key);
            }
            system.cells.push_back(std::move(loaded));
        }
    } catch (const Json::exception& e) {
        throw FormatError(manifest_path.string() + ": bad sweep results: " + e.what());
    }
    return system;
}

std::vector<std::string> sorted_ids(const std::vector<std::string>& ids) {
    std::vector<std::string> out = ids;
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

void cmd_report(const ReportOptions& opts, std::ostream& log) {
    if (opts.inputs.empty()) {
        throw InputError("report needs at least one sweep result");
    }
    std::vector<LoadedSystem> systems;
    systems.reserve(opts.inputs.size());
    for (const std::filesystem::path& input : opts.inputs) {
        systems.push_back(load_system(input));
    }
    // Disambiguate repeated labels so columns stay addressable.
    std::vector<std::string> original_labels;
    original_labels.reserve(systems.size());
    for (const LoadedSystem& system : systems) original_labels.push_back(system.label);
    for (std::size_t i = 0; i < systems.size(); ++i) {
        int copies = 1;
        for (std::size_t j = 0; j < i; ++j) {
            if (original_labels[j] == original_labels[i]) ++copies;
        }
        if (copies > 1) systems[i].label += "#" + std::to_string(copies);
    }

    // Every cell must score the same query set, or the t-test pairing (and
    // any cross-system comparison) would be meaningless.
    std::vector<std::string> reference_ids;
    std::string reference_name;
    bool have_reference = false;
    for (const LoadedSystem& system : systems) {
        for (const LoadedCell& cell : system.cells) {
            const std::vector<std::string> ids = sorted_ids(cell.query_ids);
            const std::string name =
                system.label + " " + cell.mode + " tau=" + cell.tau_key;
            if (!have_reference) {
                reference_ids = ids;
                reference_name = name;
                have_reference = true;
            } else if (ids != reference_ids) {
                throw ComparabilityError("result files cover different query sets: " + name +
                                         " does not match " + reference_name);
            }
        }
    }

    std::filesystem::create_directories(opts.out_dir);

    // Flat per-cell statistics.
    std::string cells_csv = "label,mode,tau,n,mean_em,mean_f1\n";
    for (const LoadedSystem& system : systems) {
        for (const LoadedCell& cell : system.cells) {
            cells_csv += csv_field(system.label) + "," + cell.mode + "," + cell.tau_key + "," +
                         std::to_string(cell.query_ids.size()) + "," +
                         fmt_number(cell.mean_em) + "," + fmt_number(cell.mean_f1) + "\n";
        }
    }
    write_file(opts.out_dir / "cells.csv", cells_csv);

    // EM-vs-tau curve data, taus ascending within each (label, mode).
    std::string curves_csv = "label,mode,tau,mean_em\n";
    for (const LoadedSystem& system : systems) {
        std::vector<std::string> mode_order;
        for (const LoadedCell& cell : system.cells) {
            if (std::find(mode_order.begin(), mode_order.end(), cell.mode) ==
                mode_order.end()) {
                mode_order.push_back(cell.mode);
            }
        }
        for (const std::string& mode : mode_order) {
            std::vector<const LoadedCell*> row;
            for (const LoadedCell& cell : system.cells) {
                if (cell.mode == mode) row.push_back(&cell);
            }
            std::sort(row.begin(), row.end(),
                      [](const LoadedCell* a, const LoadedCell* b) { return a->tau < b->tau; });
            for (const LoadedCell* cell : row) {
                curves_csv += csv_field(system.label) + "," + mode + "," + cell->tau_key +
                              "," + fmt_number(cell->mean_em) + "\n";
            }
        }
    }
    write_file(opts.out_dir / "curves.csv", curves_csv);

    // Effectiveness (clean EM) vs robustness (hard mix EM) per system.
    const std::string clean_key = fmt_tau(0.0);
    const std::string hard_key = fmt_tau(1.0);
    std::string tradeoff_csv = "label,clean_em,hard_mix_em\n";
    for (const LoadedSystem& system : systems) {
        const LoadedCell* clean = nullptr;
        for (const LoadedCell& cell : system.cells) {
            if (cell.tau_key == clean_key) {
                clean = &cell;  // tau=0 contexts are mode-independent
                break;
            }
        }
        const LoadedCell* hard_mix = system.find("mix", hard_key);
        if (clean != nullptr && hard_mix != nullptr) {
            tradeoff_csv += csv_field(system.label) + "," + fmt_number(clean->mean_em) + "," +
                            fmt_number(hard_mix->mean_em) + "\n";
        }
    }
    write_file(opts.out_dir / "tradeoff.csv", tradeoff_csv);

    // Pairwise significance of per-query EM against the baseline system.
    const LoadedSystem& baseline = systems.front();
    std::map<std::pair<std::string, std::string>, bool> starred;  // (label, cell key)
    std::string significance_csv = "label,mode,tau,t,p,df,significant\n";
    for (std::size_t s = 1; s < systems.size(); ++s) {
        for (const LoadedCell& cell : systems[s].cells) {
            const LoadedCell* base = baseline.find(cell.mode, cell.tau_key);
            if (base == nullptr || cell.em.size() < 2) continue;
            // The comparability check guarantees the same query sets; align
            // the candidate's scores to the baseline's query order.
            std::map<std::string, double> em_by_id;
            for (std::size_t i = 0; i < cell.query_ids.size(); ++i) {
                em_by_id[cell.query_ids[i]] = cell.em[i];
            }
            std::vector<double> aligned;
            aligned.reserve(base->query_ids.size());
            for (const std::string& id : base->query_ids) {
                aligned.push_back(em_by_id.at(id));
            }
            const SignificanceResult sig = paired_t_test(aligned, base->em);
            const std::string t_text = std::isinf(sig.t_statistic)
                                           ? (sig.t_statistic > 0 ? "inf" : "-inf")
                                           : fmt_number(sig.t_statistic);
            significance_csv += csv_field(systems[s].label) + "," + cell.mode + "," +
                                cell.tau_key + "," + t_text + "," + fmt_number(sig.p_value) +
                                "," + std::to_string(sig.df) + "," +
                                (sig.significant_at_005 ? "true" : "false") + "\n";
            if (sig.significant_at_005 && cell.mean_em > base->mean_em) {
                starred[{systems[s].label, cell.mode + "\x1f" + cell.tau_key}] = true;
            }
        }
    }
    write_file(opts.out_dir / "significance.csv", significance_csv);

    // Plain-text summary over the three headline settings.
    const std::pair<const char*, std::string> settings[] = {
        {"clean", fmt_tau(0.0)}, {"normal", fmt_tau(0.4)}, {"hard", fmt_tau(1.0)}};
    std::vector<std::string> mode_order;
    for (const LoadedSystem& system : systems) {
        for (const LoadedCell& cell : system.cells) {
            if (std::find(mode_order.begin(), mode_order.end(), cell.mode) ==
                mode_order.end()) {
                mode_order.push_back(cell.mode);
            }
        }
    }
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header = {"setting", "mode"};
    for (const LoadedSystem& system : systems) header.push_back(system.label + " EM/F1");
    table.push_back(std::move(header));
    for (const auto& [setting_name, tau_key] : settings) {
        for (const std::string& mode : mode_order) {
            bool any = false;
            for (const LoadedSystem& system : systems) {
                if (system.find(mode, tau_key) != nullptr) any = true;
            }
            if (!any) continue;
            std::vector<std::string> row = {std::string(setting_name) + " (tau=" + tau_key +
                                                ")",
                                            mode};
            for (const LoadedSystem& system : systems) {
                const LoadedCell* cell = system.find(mode, tau_key);
                if (cell == nullptr) {
                    row.push_back("-");
                    continue;
                }
                std::string text =
                    fmt_percent(cell->mean_em) + "/" + fmt_percent(cell->mean_f1);
                if (starred.count({system.label, mode + "\x1f" + tau_key}) > 0) text += "*";
                row.push_back(std::move(text));
            }
            table.push_back(std::move(row));
        }
    }
    std::vector<std::size_t> widths(table.front().size(), 0);
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::string text_table;
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            if (c > 0) text_table += "  ";
            text_table += table[r][c];
            if (c + 1 < table[r].size()) {
                text_table.append(widths[c] - table[r][c].size(), ' ');
            }
        }
        text_table += "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c) {
                total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
            }
            text_table.append(total, '-');
            text_table += "\n";
        }
    }
    if (systems.size() > 1) {
        text_table += "\n* EM significantly above " + baseline.label +
                      " (paired two-tailed t-test on per-query EM, p < 0.05)\n";
    }
    write_file(opts.out_dir / "summary_table.txt", text_table);

    log << "wrote cells.csv, curves.csv, tradeoff.csv, significance.csv and "
           "summary_table.txt to "
        << opts.out_dir.string() << "\n";
}

}  // namespace ragstress
