#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "ragstress/errors.hpp"
#include "ragstress/io.hpp"
#include "ragstress/prompts.hpp"
#include "ragstress/traingen.hpp"

#include "support.hpp"

using namespace ragstress;

namespace {

/// Grid that never needs a counterfactual store. The caller picks a cutoff
/// that leaves at least k tail ranks in its run, so noisy draws (without
/// replacement) can always fill a fully defective context.
TrainGrid harmless_grid(int cutoff) {
    TrainGrid grid;
    grid.taus = {0.2, 0.6};
    grid.modes = {DefectMode::kNoisy, DefectMode::kIrrelevant};
    grid.k = 5;
    grid.cutoff = cutoff;
    grid.seed = 7;
    return grid;
}

std::set<std::string> query_ids(const std::vector<TrainingRecord>& records) {
    std::set<std::string> ids;
    for (const TrainingRecord& record : records) ids.insert(record.query_id);
    return ids;
}

/// Everything observable about a record, keyed by (query, task) for
/// order-independent comparison.
std::map<std::pair<std::string, std::string>, std::string> by_query_task(
    const TrainingSet& set) {
    std::map<std::pair<std::string, std::string>, std::string> out;
    for (const std::vector<TrainingRecord>* bucket : {&set.train, &set.validation}) {
        for (const TrainingRecord& record : *bucket) {
            out[{record.query_id, std::string(to_string(record.task))}] =
                training_record_json(record).dump();
        }
    }
    return out;
}

}  // namespace

TEST_CASE("task kinds round-trip through their names") {
    CHECK(to_string(TaskKind::kDefectsDetection) == "defects_detection");
    CHECK(to_string(TaskKind::kUtilityExtraction) == "utility_extraction");
    CHECK(task_from_string("defects_detection") == TaskKind::kDefectsDetection);
    CHECK(task_from_string("utility_extraction") == TaskKind::kUtilityExtraction);
    CHECK_THROWS_AS(task_from_string("bogus"), InputError);
}

TEST_CASE("training grid and split fraction are validated") {
    const ts::SyntheticData data = ts::make_synthetic({2, 6, 5});
    TrainGrid grid = harmless_grid(5);
    grid.taus = {};
    CHECK_THROWS_AS(make_training_set(data.run, data.corpus, nullptr, grid, 0.1), InputError);
    grid = harmless_grid(5);
    grid.taus = {0.5, 1.5};
    CHECK_THROWS_AS(make_training_set(data.run, data.corpus, nullptr, grid, 0.1), InputError);
    grid = harmless_grid(5);
    grid.modes = {};
    CHECK_THROWS_AS(make_training_set(data.run, data.corpus, nullptr, grid, 0.1), InputError);
    grid = harmless_grid(5);
    CHECK_THROWS_AS(make_training_set(data.run, data.corpus, nullptr, grid, -0.1), InputError);
    CHECK_THROWS_AS(make_training_set(data.run, data.corpus, nullptr, grid, 1.01), InputError);
}

TEST_CASE("one detection and one extraction record per query, split by id hash") {
    const ts::SyntheticData data = ts::make_synthetic({10, 12, 5});
    const TrainGrid grid = harmless_grid(7);
    const TrainingSet set = make_training_set(data.run, data.corpus, nullptr, grid, 0.1);

    CHECK(set.train.size() + set.validation.size() == 20);
    CHECK(set.validation.size() == 2);  // exactly one query's pair
    CHECK(query_ids(set.validation).size() == 1);

    const std::set<std::string> train_ids = query_ids(set.train);
    const std::set<std::string> validation_ids = query_ids(set.validation);
    for (const std::string& id : validation_ids) {
        CHECK(train_ids.count(id) == 0);
    }
    CHECK(train_ids.size() + validation_ids.size() == 10);

    // per query the detection record comes first, then extraction
    for (std::size_t i = 0; i + 1 < set.train.size(); i += 2) {
        CHECK(set.train[i].query_id == set.train[i + 1].query_id);
        CHECK(set.train[i].task == TaskKind::kDefectsDetection);
        CHECK(set.train[i + 1].task == TaskKind::kUtilityExtraction);
    }

    for (const TrainingRecord& record : set.train) {
        CHECK((record.tau == 0.2 || record.tau == 0.6));
        CHECK((record.mode == DefectMode::kNoisy || record.mode == DefectMode::kIrrelevant));
        CHECK_FALSE(record.instruction_input.empty());
        if (record.task == TaskKind::kDefectsDetection) {
            // the target must be a well-formed five-doc assessment
            CHECK(parse_dd_output(record.target_output, 5).size() == 5);
        } else {
            // extraction always targets the query's first gold answer
            const int i = std::stoi(record.query_id.substr(1));
            CHECK(record.target_output == ts::gold_answer(i));
        }
    }
}

TEST_CASE("the two tasks sample their defect settings independently") {
    const ts::SyntheticData data = ts::make_synthetic({10, 12, 5});
    const TrainingSet set =
        make_training_set(data.run, data.corpus, nullptr, harmless_grid(7), 0.0);
    bool any_differ = false;
    for (std::size_t i = 0; i + 1 < set.train.size(); i += 2) {
        if (set.train[i].tau != set.train[i + 1].tau ||
            set.train[i].mode != set.train[i + 1].mode) {
            any_differ = true;
        }
    }
    CHECK(any_differ);
}

TEST_CASE("records and split membership do not depend on run order") {
    const ts::SyntheticData data = ts::make_synthetic({10, 12, 5});
    Run reversed;
    const std::vector<QueryRecord>& records = data.run.records();
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        reversed.add(*it);
    }
    const TrainGrid grid = harmless_grid(7);
    const TrainingSet forward = make_training_set(data.run, data.corpus, nullptr, grid, 0.3);
    const TrainingSet backward = make_training_set(reversed, data.corpus, nullptr, grid, 0.3);

    CHECK(query_ids(forward.validation) == query_ids(backward.validation));
    CHECK(by_query_task(forward) == by_query_task(backward));
}

TEST_CASE("regeneration with the same seed is byte-identical, other seeds move") {
    const ts::SyntheticData data = ts::make_synthetic({10, 12, 5});
    const TrainGrid grid = harmless_grid(7);
    const TrainingSet a = make_training_set(data.run, data.corpus, nullptr, grid, 0.2);
    const TrainingSet b = make_training_set(data.run, data.corpus, nullptr, grid, 0.2);
    CHECK(by_query_task(a) == by_query_task(b));

    TrainGrid other = grid;
    other.seed = 8;
    const TrainingSet c = make_training_set(data.run, data.corpus, nullptr, other, 0.2);
    CHECK(by_query_task(a) != by_query_task(c));
}

TEST_CASE("the validation split size is rounded, with all-or-nothing extremes") {
    const ts::SyntheticData data = ts::make_synthetic({10, 12, 5});
    const TrainGrid grid = harmless_grid(7);
    CHECK(make_training_set(data.run, data.corpus, nullptr, grid, 0.0).validation.empty());
    CHECK(make_training_set(data.run, data.corpus, nullptr, grid, 1.0).train.empty());
    // lround(0.25 * 10) rounds half away from zero
    const TrainingSet set = make_training_set(data.run, data.corpus, nullptr, grid, 0.25);
    CHECK(query_ids(set.validation).size() == 3);
    CHECK(set.validation.size() == 6);
}

TEST_CASE("counterfactual coverage is checked before any record is built") {
    TrainGrid grid;
    grid.taus = {1.0};
    grid.modes = {DefectMode::kCounterfactual};
    grid.k = 5;
    grid.cutoff = 8;
    grid.seed = 3;

    SUBCASE("every missing pair is listed") {
        const ts::SyntheticData data = ts::make_synthetic({3, 8, 5});
        try {
            make_training_set(data.run, data.corpus, nullptr, grid, 0.0);
            FAIL("expected DependencyError");
        } catch (const DependencyError& error) {
            const std::string what = error.what();
            CHECK(what.find("missing 15 rewrite(s)") != std::string::npos);
            CHECK(what.find("query q00000, document q00000-d1") != std::string::npos);
            CHECK(what.find("query q00002, document q00002-d5") != std::string::npos);
            CHECK(what.find("more") == std::string::npos);  // all 15 fit the listing
        }
    }

    SUBCASE("long listings are truncated with a count") {
        const ts::SyntheticData data = ts::make_synthetic({6, 8, 5});
        try {
            make_training_set(data.run, data.corpus, nullptr, grid, 0.0);
            FAIL("expected DependencyError");
        } catch (const DependencyError& error) {
            const std::string what = error.what();
            CHECK(what.find("missing 30 rewrite(s)") != std::string::npos);
            CHECK(what.find("; and 10 more") != std::string::npos);
        }
    }

    SUBCASE("one absent rewrite is enough to fail, and is named") {
        const ts::SyntheticData data = ts::make_synthetic({3, 8, 5});
        CounterfactualStore store;
        for (int i = 0; i < 3; ++i) {
            const std::string qid = ts::query_id(i);
            for (int r = 1; r <= 5; ++r) {
                const std::string doc_id = qid + "-d" + std::to_string(r);
                if (doc_id == "q00001-d4") continue;
                store.put({qid, doc_id, "omega decoy",
                           "the revised record says the answer is omega decoy"});
            }
        }
        try {
            make_training_set(data.run, data.corpus, &store, grid, 0.0);
            FAIL("expected DependencyError");
        } catch (const DependencyError& error) {
            const std::string what = error.what();
            CHECK(what.find("missing 1 rewrite(s)") != std::string::npos);
            CHECK(what.find("query q00001, document q00001-d4") != std::string::npos);
        }
    }

    SUBCASE("a complete store yields fully counterfactual records") {
        const ts::SyntheticData data = ts::make_synthetic({3, 8, 5});
        CounterfactualStore store;
        for (int i = 0; i < 3; ++i) {
            const std::string qid = ts::query_id(i);
            for (int r = 1; r <= 5; ++r) {
                store.put({qid, qid + "-d" + std::to_string(r), "omega decoy",
                           "the revised record says the answer is omega decoy"});
            }
        }
        const TrainingSet set = make_training_set(data.run, data.corpus, &store, grid, 0.0);
        REQUIRE(set.train.size() == 6);
        for (const TrainingRecord& record : set.train) {
            CHECK(record.tau == 1.0);
            CHECK(record.mode == DefectMode::kCounterfactual);
            if (record.task == TaskKind::kDefectsDetection) {
                const std::vector<AssessmentLabel> labels =
                    parse_dd_output(record.target_output, 5);
                for (AssessmentLabel label : labels) {
                    CHECK(label == AssessmentLabel::kIncorrect);
                }
            } else {
                CHECK(record.instruction_input.find(
                          "the revised record says the answer is omega decoy") !=
                      std::string::npos);
            }
        }
    }
}

TEST_CASE("training rows serialize as instruction-tuning JSON") {
    TrainingRecord record;
    record.task = TaskKind::kUtilityExtraction;
    record.instruction_input = "prompt text";
    record.target_output = "gold";
    record.query_id = "q00004";
    record.tau = 0.4;
    record.mode = DefectMode::kMix;

    const Json row = training_record_json(record);
    CHECK(row.dump() ==
          R"({"instruction":"","input":"prompt text","output":"gold",)"
          R"("meta":{"task":"utility_extraction","query_id":"q00004","tau":0.4,"mode":"mix"}})");
}

TEST_CASE("save_training_records writes one JSON line per record") {
    const ts::SyntheticData data = ts::make_synthetic({4, 12, 5});
    const TrainingSet set =
        make_training_set(data.run, data.corpus, nullptr, harmless_grid(7), 0.0);
    ts::TempDir dir("traingen");
    const auto path = dir.path() / "train.jsonl";
    save_training_records(set.train, path);

    std::size_t lines = 0;
    for_each_jsonl(path, [&](std::size_t, const Json& row) {
        ++lines;
        CHECK(row.at("instruction") == "");
        CHECK_FALSE(row.at("input").get<std::string>().empty());
        CHECK(row.at("meta").contains("tau"));
    });
    CHECK(lines == 8);
}
