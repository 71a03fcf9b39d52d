#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <doctest.h>

#include "ragstress/cf_store.hpp"
#include "ragstress/defects.hpp"
#include "ragstress/errors.hpp"
#include "ragstress/rng.hpp"
#include "support.hpp"

using namespace ragstress;

namespace {

DefectConfig config_for(double tau, DefectMode mode, ReplacementScheme scheme,
                        int k = 5, int cutoff = 5, uint64_t seed = 0) {
    DefectConfig config;
    config.tau = tau;
    config.mode = mode;
    config.cutoff = cutoff;
    config.k = k;
    config.seed = seed;
    config.scheme = scheme;
    return config;
}

std::set<std::size_t> replaced_slots(const std::vector<std::optional<DefectType>>& plan) {
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].has_value()) out.insert(i);
    }
    return out;
}

/// A counterfactual store covering every (query, top-k doc) pair of the run
/// with a fixed decoy body, enough for injection-level tests.
CounterfactualStore full_stub_store(const Run& run, int k) {
    CounterfactualStore store;
    for (const QueryRecord& record : run.records()) {
        for (const std::string& doc_id : top_k(record.list, static_cast<std::size_t>(k))) {
            store.put({record.query.query_id, doc_id, "omega decoy",
                       "the revised record says the answer is omega decoy"});
        }
    }
    return store;
}

}  // namespace

TEST_CASE("defect enums round-trip through their names") {
    for (DefectType type : {DefectType::kPositive, DefectType::kNoisy, DefectType::kIrrelevant,
                            DefectType::kCounterfactual}) {
        CHECK(defect_type_from_string(to_string(type)) == type);
    }
    for (DefectMode mode : {DefectMode::kNoisy, DefectMode::kIrrelevant,
                            DefectMode::kCounterfactual, DefectMode::kMix}) {
        CHECK(defect_mode_from_string(to_string(mode)) == mode);
    }
    for (ReplacementScheme scheme : {ReplacementScheme::kBernoulli,
                                     ReplacementScheme::kExactCount}) {
        CHECK(scheme_from_string(to_string(scheme)) == scheme);
    }
    CHECK_THROWS_AS(defect_type_from_string("bogus"), InputError);
    CHECK_THROWS_AS(defect_mode_from_string("bogus"), InputError);
    CHECK_THROWS_AS(scheme_from_string("bogus"), InputError);
}

TEST_CASE("defect config validation pins the parameter ranges") {
    CHECK_NOTHROW(config_for(0.0, DefectMode::kMix, ReplacementScheme::kBernoulli).validate());
    CHECK_NOTHROW(config_for(1.0, DefectMode::kMix, ReplacementScheme::kBernoulli).validate());
    CHECK_THROWS_AS(
        config_for(-0.1, DefectMode::kMix, ReplacementScheme::kBernoulli).validate(),
        InputError);
    CHECK_THROWS_AS(
        config_for(1.1, DefectMode::kMix, ReplacementScheme::kBernoulli).validate(),
        InputError);
    CHECK_THROWS_AS(
        config_for(0.5, DefectMode::kMix, ReplacementScheme::kBernoulli, 0).validate(),
        InputError);
    // cutoff below k would let noisy draws collide with the context itself
    CHECK_THROWS_AS(
        config_for(0.5, DefectMode::kMix, ReplacementScheme::kBernoulli, 5, 4).validate(),
        InputError);
}

TEST_CASE("exact_replacement_count rounds half away from zero") {
    CHECK(exact_replacement_count(0.0, 5) == 0);
    CHECK(exact_replacement_count(0.1, 5) == 1);  // 0.5 rounds up
    CHECK(exact_replacement_count(0.2, 5) == 1);
    CHECK(exact_replacement_count(0.5, 5) == 3);  // 2.5 rounds up
    CHECK(exact_replacement_count(0.8, 5) == 4);
    CHECK(exact_replacement_count(1.0, 5) == 5);
    CHECK(exact_replacement_count(0.5, 4) == 2);
}

TEST_CASE("plan_replacements fills every replaced slot with the mode's type") {
    Rng rng(1);
    const auto plan =
        plan_replacements(5, config_for(1.0, DefectMode::kNoisy, ReplacementScheme::kBernoulli),
                          rng);
    REQUIRE(plan.size() == 5);
    for (const auto& slot : plan) {
        REQUIRE(slot.has_value());
        CHECK(*slot == DefectType::kNoisy);
    }

    Rng rng2(1);
    const auto mixed = plan_replacements(
        5, config_for(1.0, DefectMode::kMix, ReplacementScheme::kBernoulli), rng2);
    for (const auto& slot : mixed) {
        REQUIRE(slot.has_value());
        CHECK(*slot != DefectType::kPositive);
    }
}

TEST_CASE("exact_count scheme replaces exactly round(tau*k) slots") {
    for (int k : {1, 3, 5, 8}) {
        for (double tau : {0.0, 0.1, 0.2, 0.35, 0.5, 0.6, 0.8, 1.0}) {
            for (uint64_t stream = 0; stream < 50; ++stream) {
                Rng rng = derive_rng(11, "plan/" + std::to_string(stream));
                const auto plan = plan_replacements(
                    k, config_for(tau, DefectMode::kIrrelevant, ReplacementScheme::kExactCount,
                                  k, k),
                    rng);
                CHECK(static_cast<int>(replaced_slots(plan).size()) ==
                      exact_replacement_count(tau, k));
            }
        }
    }
}

TEST_CASE("bernoulli scheme hits the configured rate over many slots") {
    for (double tau : {0.2, 0.4, 0.6, 0.8}) {
        int replaced = 0;
        int total = 0;
        for (int stream = 0; stream < 2200; ++stream) {
            Rng rng = derive_rng(0, "rate/" + std::to_string(stream));
            const auto plan = plan_replacements(
                5, config_for(tau, DefectMode::kNoisy, ReplacementScheme::kBernoulli), rng);
            replaced += static_cast<int>(replaced_slots(plan).size());
            total += 5;
        }
        const double fraction = static_cast<double>(replaced) / total;
        CHECK(std::fabs(fraction - tau) < 0.02);
    }
}

TEST_CASE("replaced sets nest as tau grows on a fixed stream, both schemes") {
    const std::vector<double> taus = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    for (ReplacementScheme scheme : {ReplacementScheme::kBernoulli,
                                     ReplacementScheme::kExactCount}) {
        for (int stream = 0; stream < 200; ++stream) {
            std::set<std::size_t> previous;
            for (double tau : taus) {
                Rng rng = derive_rng(7, "nest/" + std::to_string(stream));
                const auto plan = plan_replacements(
                    5, config_for(tau, DefectMode::kIrrelevant, scheme), rng);
                const std::set<std::size_t> current = replaced_slots(plan);
                CHECK(std::includes(current.begin(), current.end(), previous.begin(),
                                    previous.end()));
                previous = current;
            }
        }
    }
}

TEST_CASE("inject at tau 0 returns the clean context unchanged") {
    const ts::SyntheticData data = ts::make_synthetic({4, 12, 5});
    for (DefectMode mode : {DefectMode::kNoisy, DefectMode::kIrrelevant,
                            DefectMode::kCounterfactual, DefectMode::kMix}) {
        for (const QueryRecord& record : data.run.records()) {
            const DefectiveContext context =
                inject(record, data.corpus, nullptr,
                       config_for(0.0, mode, ReplacementScheme::kBernoulli));
            REQUIRE(context.slots.size() == 5);
            const std::vector<Document> clean = top_k_documents(record, data.corpus, 5);
            for (std::size_t i = 0; i < 5; ++i) {
                CHECK(context.slots[i].document == clean[i]);
                CHECK(context.slots[i].label == DefectType::kPositive);
                CHECK(context.slots[i].provenance == "rank:" + std::to_string(i + 1));
            }
        }
    }
}

TEST_CASE("noisy slots draw distinct tail documents of the same query") {
    const ts::SyntheticData data = ts::make_synthetic({3, 15, 5});
    for (const QueryRecord& record : data.run.records()) {
        const DefectiveContext context =
            inject(record, data.corpus, nullptr,
                   config_for(1.0, DefectMode::kNoisy, ReplacementScheme::kBernoulli));
        std::set<std::string> drawn;
        for (const ContextSlot& slot : context.slots) {
            CHECK(slot.label == DefectType::kNoisy);
            CHECK(drawn.insert(slot.document.doc_id).second);  // without replacement

            // provenance names the tail rank the document actually holds
            REQUIRE(slot.provenance.rfind("tail_rank:", 0) == 0);
            const int rank = std::stoi(slot.provenance.substr(10));
            CHECK(rank > 5);
            CHECK(record.list.entries[static_cast<std::size_t>(rank - 1)].doc_id ==
                  slot.document.doc_id);
        }
    }
}

TEST_CASE("irrelevant slots come from outside the query's retrieval list") {
    const ts::SyntheticData data = ts::make_synthetic({2, 10, 5});
    const QueryRecord& record = data.run.records()[0];
    std::unordered_set<std::string> run_ids;
    for (const RankedEntry& entry : record.list.entries) run_ids.insert(entry.doc_id);

    const DefectiveContext context =
        inject(record, data.corpus, nullptr,
               config_for(1.0, DefectMode::kIrrelevant, ReplacementScheme::kBernoulli));
    std::set<std::string> drawn;
    for (const ContextSlot& slot : context.slots) {
        CHECK(slot.label == DefectType::kIrrelevant);
        CHECK(slot.provenance == "corpus_draw");
        CHECK(run_ids.count(slot.document.doc_id) == 0);
        CHECK(drawn.insert(slot.document.doc_id).second);  // no repeats within the context
    }
}

TEST_CASE("irrelevant injection reports exhaustion when the corpus is all excluded") {
    // a single query whose retrieval list covers the whole corpus
    const ts::SyntheticData data = ts::make_synthetic({1, 10, 5});
    CHECK_THROWS_AS(
        inject(data.run.records()[0], data.corpus, nullptr,
               config_for(1.0, DefectMode::kIrrelevant, ReplacementScheme::kBernoulli)),
        ExhaustedError);
}

TEST_CASE("noisy injection reports exhaustion when no tail exists") {
    const ts::SyntheticData data = ts::make_synthetic({2, 10, 5});
    CHECK_THROWS_AS(
        inject(data.run.records()[0], data.corpus, nullptr,
               config_for(1.0, DefectMode::kNoisy, ReplacementScheme::kBernoulli, 5, 10)),
        ExhaustedError);
}

TEST_CASE("counterfactual slots take the stored rewrite of the original occupant") {
    const ts::SyntheticData data = ts::make_synthetic({3, 10, 5});
    const CounterfactualStore store = full_stub_store(data.run, 5);

    for (const QueryRecord& record : data.run.records()) {
        const std::vector<Document> clean = top_k_documents(record, data.corpus, 5);
        const DefectiveContext context =
            inject(record, data.corpus, &store,
                   config_for(1.0, DefectMode::kCounterfactual,
                              ReplacementScheme::kBernoulli));
        for (std::size_t i = 0; i < context.slots.size(); ++i) {
            const ContextSlot& slot = context.slots[i];
            CHECK(slot.label == DefectType::kCounterfactual);
            CHECK(slot.provenance == "parent:" + clean[i].doc_id);
            CHECK(slot.document.doc_id == clean[i].doc_id);
            CHECK(slot.document.title == clean[i].title);
            CHECK(slot.document.body == "the revised record says the answer is omega decoy");
        }
    }
}

TEST_CASE("counterfactual slots without a covering store raise a dependency error") {
    const ts::SyntheticData data = ts::make_synthetic({1, 10, 5});
    const DefectConfig config =
        config_for(1.0, DefectMode::kCounterfactual, ReplacementScheme::kBernoulli);
    CHECK_THROWS_AS(inject(data.run.records()[0], data.corpus, nullptr, config),
                    DependencyError);

    // a store that misses one pair fails too, naming the document
    CounterfactualStore partial;
    partial.put({"q00000", "q00000-d1", "omega decoy", "decoy body"});
    try {
        inject(data.run.records()[0], data.corpus, &partial, config);
        FAIL("expected DependencyError");
    } catch (const DependencyError& e) {
        CHECK(std::string(e.what()).find("q00000-d2") != std::string::npos);
    }
}

TEST_CASE("injection is a pure function of (seed, query), immune to call order") {
    const ts::SyntheticData data = ts::make_synthetic({4, 12, 5});
    const CounterfactualStore store = full_stub_store(data.run, 5);
    const DefectConfig config =
        config_for(0.6, DefectMode::kMix, ReplacementScheme::kBernoulli);

    const auto render = [&](const QueryRecord& record) {
        const DefectiveContext context = inject(record, data.corpus, &store, config);
        std::string out;
        for (const ContextSlot& slot : context.slots) {
            out += slot.document.doc_id + "|" + slot.document.body + "|" +
                   std::string(to_string(slot.label)) + "|" + slot.provenance + "\n";
        }
        return out;
    };

    const std::string first = render(data.run.records()[1]);
    render(data.run.records()[0]);  // interleave other queries
    render(data.run.records()[3]);
    CHECK(render(data.run.records()[1]) == first);

    // a different seed changes the outcome for at least one query
    DefectConfig other = config;
    other.seed = 1;
    bool any_difference = false;
    for (const QueryRecord& record : data.run.records()) {
        const DefectiveContext a = inject(record, data.corpus, &store, config);
        const DefectiveContext b = inject(record, data.corpus, &store, other);
        for (std::size_t i = 0; i < a.slots.size(); ++i) {
            if (a.slots[i].label != b.slots[i].label ||
                a.slots[i].document.doc_id != b.slots[i].document.doc_id) {
                any_difference = true;
            }
        }
    }
    CHECK(any_difference);
}

TEST_CASE("inject rejects a clean context of the wrong size") {
    const ts::SyntheticData data = ts::make_synthetic({1, 10, 5});
    const QueryRecord& record = data.run.records()[0];
    const std::vector<Document> three = top_k_documents(record, data.corpus, 3);
    CHECK_THROWS_AS(inject(record.query, three, record.list, data.corpus, nullptr,
                           config_for(0.0, DefectMode::kMix, ReplacementScheme::kBernoulli)),
                    InputError);
}

TEST_CASE("counterfactual_parents names exactly the slots inject fills with rewrites") {
    const ts::SyntheticData data = ts::make_synthetic({6, 12, 5});
    const CounterfactualStore store = full_stub_store(data.run, 5);
    for (ReplacementScheme scheme : {ReplacementScheme::kBernoulli,
                                     ReplacementScheme::kExactCount}) {
        for (DefectMode mode : {DefectMode::kCounterfactual, DefectMode::kMix}) {
            for (double tau : {0.0, 0.4, 0.8, 1.0}) {
                const DefectConfig config = config_for(tau, mode, scheme);
                for (const QueryRecord& record : data.run.records()) {
                    const std::vector<std::string> predicted =
                        counterfactual_parents(record, config);
                    const DefectiveContext context =
                        inject(record, data.corpus, &store, config);
                    std::vector<std::string> actual;
                    for (const ContextSlot& slot : context.slots) {
                        if (slot.label == DefectType::kCounterfactual) {
                            actual.push_back(slot.document.doc_id);
                        }
                    }
                    CHECK(predicted == actual);
                }
            }
        }
    }
}
