#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mgtkit/errors.hpp"
#include "mgtkit/evalkit.hpp"
#include "testutil.hpp"

using namespace mgtkit;

namespace {

ConfusionMatrix cm_of(const std::vector<std::string>& labels,
                      const std::vector<std::vector<long long>>& counts) {
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts = counts;
    return cm;
}

}  // namespace

TEST_CASE("confusion_matrix counts gold/predicted pairs") {
    const auto identity = confusion_matrix({"a", "b"}, {"a", "b"}, {"a", "b"});
    CHECK(identity.counts == std::vector<std::vector<long long>>{{1, 0}, {0, 1}});

    const auto wrong = confusion_matrix({"a", "a"}, {"b", "b"}, {"a", "b"});
    CHECK(wrong.counts == std::vector<std::vector<long long>>{{0, 2}, {0, 0}});
}

TEST_CASE("confusion_matrix validates inputs") {
    CHECK_THROWS_AS(confusion_matrix({"a"}, {"a", "b"}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(confusion_matrix({}, {}, {"a"}), ValidationError);
    CHECK_THROWS_AS(confusion_matrix({"z"}, {"a"}, {"a"}), ValidationError);
    CHECK_THROWS_AS(confusion_matrix({"a"}, {"z"}, {"a"}), ValidationError);
}

TEST_CASE("confusion_matrix conserves the number of examples") {
    std::mt19937_64 rng(3);
    const std::vector<std::string> labels = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        std::vector<std::string> golds, preds;
        for (std::size_t i = 0; i < n; ++i) {
            golds.push_back(labels[rng() % labels.size()]);
            preds.push_back(labels[rng() % labels.size()]);
        }
        const auto cm = confusion_matrix(golds, preds, labels);
        CHECK(cm.total() == static_cast<long long>(n));
    }
}

TEST_CASE("binary_metrics on the worked four-cell example") {
    // TP=8, FP=2, FN=1, TN=9 with "pos" as the positive label
    const auto cm = cm_of({"neg", "pos"}, {{9, 2}, {1, 8}});
    const EvalMetrics m = binary_metrics(cm, "pos");
    CHECK(m.precision == doctest::Approx(80.0));
    CHECK(m.recall == doctest::Approx(88.8888888889));
    CHECK(m.f1 == doctest::Approx(84.2105263158));
    CHECK(m.accuracy == doctest::Approx(85.0));
    CHECK(format2(m.recall) == "88.89");
    CHECK(format2(m.f1) == "84.21");
}

TEST_CASE("binary_metrics edge cases") {
    const auto perfect = cm_of({"n", "p"}, {{5, 0}, {0, 5}});
    const EvalMetrics all = binary_metrics(perfect, "p");
    CHECK(all.accuracy == doctest::Approx(100.0));
    CHECK(all.precision == doctest::Approx(100.0));
    CHECK(all.recall == doctest::Approx(100.0));
    CHECK(all.f1 == doctest::Approx(100.0));

    // no positive predictions and no positive golds
    const auto degenerate = cm_of({"n", "p"}, {{7, 0}, {0, 0}});
    const EvalMetrics m = binary_metrics(degenerate, "p");
    CHECK_FALSE(m.precision_defined);
    CHECK_FALSE(m.recall_defined);
    CHECK(m.precision == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.accuracy == doctest::Approx(100.0));  // all-negative predictions are right

    CHECK_THROWS_AS(binary_metrics(cm_of({"a"}, {{0}}), "a"), ValidationError);
    CHECK_THROWS_AS(binary_metrics(perfect, "zzz"), ValidationError);
}

TEST_CASE("f1 is the harmonic mean of precision and recall when both are positive") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto cm = cm_of({"n", "p"}, {{static_cast<long long>(rng() % 20),
                                            static_cast<long long>(rng() % 20)},
                                           {static_cast<long long>(rng() % 20),
                                            static_cast<long long>(rng() % 20)}});
        if (cm.total() == 0) continue;
        const EvalMetrics m = binary_metrics(cm, "p");
        if (m.precision + m.recall > 0)
            CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall /
                                          (m.precision + m.recall))
                              .epsilon(1e-9));
    }
}

TEST_CASE("per_class_metrics: identity matrix scores 100 everywhere") {
    const auto cm = cm_of({"a", "b", "c"}, {{4, 0, 0}, {0, 5, 0}, {0, 0, 6}});
    for (const auto& [label, m] : per_class_metrics(cm)) {
        CHECK(m.accuracy == doctest::Approx(100.0));
        CHECK(m.precision == doctest::Approx(100.0));
        CHECK(m.recall == doctest::Approx(100.0));
        CHECK(m.f1 == doctest::Approx(100.0));
    }
}

TEST_CASE("per_class_metrics pools one-vs-rest cells") {
    const auto cm = cm_of({"c1", "c2", "c3"}, {{5, 0, 0}, {0, 4, 1}, {0, 2, 3}});
    const auto per_class = per_class_metrics(cm);
    CHECK(per_class.at("c2").precision == doctest::Approx(100.0 * 4.0 / 6.0));
    CHECK(format2(per_class.at("c2").precision) == "66.67");
    // binarized accuracy for c2: TP=4, FP=2, FN=1, TN=8 -> 12/15
    CHECK(per_class.at("c2").accuracy == doctest::Approx(100.0 * 12.0 / 15.0));
    CHECK_THROWS_AS(per_class_metrics(cm_of({"a"}, {{3}})), ValidationError);
}

TEST_CASE("per-class recall equals the diagonal over the row sum") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 4;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < k; ++i) labels.push_back("c" + std::to_string(i));
        std::vector<std::vector<long long>> counts(k, std::vector<long long>(k, 0));
        for (auto& row : counts)
            for (auto& cell : row) cell = static_cast<long long>(rng() % 10);
        const auto cm = cm_of(labels, counts);
        if (cm.total() == 0) continue;
        const auto per_class = per_class_metrics(cm);
        for (std::size_t c = 0; c < k; ++c) {
            long long row_sum = 0;
            for (long long v : counts[c]) row_sum += v;
            if (row_sum == 0) {
                CHECK_FALSE(per_class.at(labels[c]).recall_defined);
            } else {
                CHECK(per_class.at(labels[c]).recall ==
                      doctest::Approx(100.0 * static_cast<double>(counts[c][c]) /
                                      static_cast<double>(row_sum)));
            }
        }
    }
}

TEST_CASE("accuracy equals trace over total and micro-recall equals accuracy") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 2 + rng() % 4;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < k; ++i) labels.push_back("c" + std::to_string(i));
        std::vector<std::vector<long long>> counts(k, std::vector<long long>(k, 0));
        bool any = false;
        for (auto& row : counts)
            for (auto& cell : row) {
                cell = static_cast<long long>(rng() % 8);
                any = any || cell > 0;
            }
        if (!any) counts[0][0] = 1;
        const auto cm = cm_of(labels, counts);

        const double accuracy = binary_metrics(cm, labels[0]).accuracy;
        const double trace_total =
            100.0 * static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
        CHECK(std::abs(accuracy - trace_total) <= 1e-12);

        // micro recall: sum TP / sum (TP + FN) over classes = trace / total
        long long tp_sum = 0, tp_fn_sum = 0;
        for (std::size_t c = 0; c < k; ++c) {
            tp_sum += counts[c][c];
            for (long long v : counts[c]) tp_fn_sum += v;
        }
        const double micro_recall =
            100.0 * static_cast<double>(tp_sum) / static_cast<double>(tp_fn_sum);
        CHECK(std::abs(micro_recall - trace_total) <= 1e-12);
    }
}

namespace {

std::map<std::string, Corpus> four_marker_sources(std::size_t docs_per_source) {
    std::map<std::string, Corpus> sources;
    const std::vector<std::pair<std::string, std::string>> roster = {
        {"allam", "aamark"}, {"gpt-4", "ggmark"}, {"jais", "jjmark"}, {"llama", "llmark"}};
    std::uint64_t seed = 40;
    for (const auto& [name, marker] : roster)
        sources[name] = testutil::synthetic_corpus(docs_per_source, 40, name,
                                                   {marker, marker + "x"}, 0.25, seed++, name);
    return sources;
}

FeatureConfig eval_config() {
    FeatureConfig config;
    config.hashed_dims = 512;
    return config;
}

TrainConfig fast_train() {
    TrainConfig config;
    config.max_epochs = 4;
    config.seed = 9;
    return config;
}

}  // namespace

TEST_CASE("cross_model_eval produces a complete grid with self-detection dominance") {
    const Corpus human = testutil::synthetic_corpus(160, 40, "human", {}, 0.0, 80, "h");
    const auto sources = four_marker_sources(160);
    const SplitSpec split_spec{0.7, 0.15, 0.15, 4};

    const CrossModelMatrix grid =
        cross_model_eval(human, sources, split_spec, eval_config(), fast_train());
    REQUIRE(grid.sources.size() == 4);
    REQUIRE(grid.cells.size() == 4);
    for (const auto& row : grid.cells) REQUIRE(row.size() == 4);

    for (std::size_t x = 0; x < 4; ++x) {
        double off_diag = 0.0;
        for (std::size_t y = 0; y < 4; ++y)
            if (y != x) off_diag += grid.cells[x][y].f1;
        off_diag /= 3.0;
        CHECK(grid.cells[x][x].f1 >= off_diag);
    }
}

TEST_CASE("cross_model_eval: identical machine sets give identical cells") {
    const Corpus human = testutil::synthetic_corpus(120, 40, "human", {}, 0.0, 90, "h");
    Corpus machine = testutil::synthetic_corpus(120, 40, "m1", {"qqmark"}, 0.25, 91, "m");
    std::map<std::string, Corpus> sources;
    sources["m1"] = machine;
    // same documents under a different source name (fresh ids, same text)
    Corpus clone;
    for (const auto& doc : machine.documents)
        clone.documents.push_back(make_document("c_" + doc.id, doc.text,
                                                Authorship::model("m2"), doc.domain,
                                                doc.method));
    sources["m2"] = clone;

    const CrossModelMatrix grid = cross_model_eval(human, sources, SplitSpec{0.7, 0.15, 0.15, 5},
                                                   eval_config(), fast_train());
    CHECK(grid.cells[0][0].f1 == doctest::Approx(grid.cells[0][1].f1));
    CHECK(grid.cells[0][0].accuracy == doctest::Approx(grid.cells[0][1].accuracy));
}

TEST_CASE("cross_model_eval is reproducible bit-exactly under fixed seeds") {
    const Corpus human = testutil::synthetic_corpus(100, 40, "human", {}, 0.0, 95, "h");
    std::map<std::string, Corpus> sources;
    sources["a"] = testutil::synthetic_corpus(100, 40, "a", {"aam"}, 0.25, 96, "a");
    sources["b"] = testutil::synthetic_corpus(100, 40, "b", {"bbm"}, 0.25, 97, "b");
    const SplitSpec split_spec{0.7, 0.15, 0.15, 6};

    const auto grid1 = cross_model_eval(human, sources, split_spec, eval_config(), fast_train());
    const auto grid2 = cross_model_eval(human, sources, split_spec, eval_config(), fast_train());
    for (std::size_t x = 0; x < grid1.sources.size(); ++x)
        for (std::size_t y = 0; y < grid1.sources.size(); ++y) {
            CHECK(grid1.cells[x][y].f1 == grid2.cells[x][y].f1);
            CHECK(grid1.cells[x][y].accuracy == grid2.cells[x][y].accuracy);
        }
}

TEST_CASE("cross_model_eval validates its inputs") {
    const Corpus human = testutil::synthetic_corpus(50, 40, "human", {}, 0.0, 98, "h");
    std::map<std::string, Corpus> one;
    one["only"] = testutil::synthetic_corpus(50, 40, "only", {"om"}, 0.2, 99, "o");
    CHECK_THROWS_AS(cross_model_eval(human, one, SplitSpec{}, eval_config(), fast_train()),
                    ValidationError);

    std::map<std::string, Corpus> with_tiny = one;
    with_tiny["tiny"] = testutil::synthetic_corpus(2, 40, "tiny", {"tm"}, 0.2, 100, "t");
    try {
        cross_model_eval(human, with_tiny, SplitSpec{}, eval_config(), fast_train());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("tiny") != std::string::npos);
    }
}

TEST_CASE("multiclass_eval yields K classes with diagonal dominance") {
    const Corpus human = testutil::synthetic_corpus(150, 40, "human", {}, 0.0, 110, "h");
    const auto sources = four_marker_sources(150);
    const MulticlassResult result = multiclass_eval(human, sources, SplitSpec{0.7, 0.15, 0.15, 7},
                                                    eval_config(), fast_train());

    CHECK(result.model.labels.size() == 5);
    CHECK(result.per_class.size() == 5);
    REQUIRE(result.confusion.labels.size() == 5);

    // row sums equal per-class test counts: every source had 150 docs split
    // 15% to test, the human corpus likewise
    for (std::size_t c = 0; c < 5; ++c) {
        long long row_sum = 0;
        for (long long v : result.confusion.counts[c]) row_sum += v;
        CHECK(row_sum == 23);  // floor(150*0.7)=105, floor(150*0.15)=22, rest 23
    }
    for (std::size_t c = 0; c < 5; ++c) {
        for (std::size_t j = 0; j < 5; ++j) {
            if (j == c) continue;
            CHECK(result.confusion.counts[c][c] > result.confusion.counts[c][j]);
        }
    }
}

TEST_CASE("report emission: CSV shape") {
    testutil::TempDir dir;
    CrossModelMatrix grid;
    grid.sources = {"a", "b", "c", "d"};
    grid.cells.assign(4, std::vector<EvalMetrics>(4));
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) {
            grid.cells[x][y].accuracy = 90.0 + static_cast<double>(x);
            grid.cells[x][y].precision = 91.123456;
            grid.cells[x][y].recall = 92.0;
            grid.cells[x][y].f1 = 91.5594;
        }
    const auto path = dir.file("grid.csv");
    write_cross_model_report(grid, ReportFormat::Csv, path);
    const std::string contents = testutil::read_file(path);
    CHECK(std::count(contents.begin(), contents.end(), '\n') == 17);  // header + 16 rows
    CHECK(contents.find("train,test,accuracy,precision,recall,f1\n") == 0);
    CHECK(contents.find("91.12") != std::string::npos);  // 2-decimal half-up
    CHECK(contents.find("91.56") != std::string::npos);
}

TEST_CASE("report emission: markdown column count is test sources plus two") {
    testutil::TempDir dir;
    CrossModelMatrix grid;
    grid.sources = {"a", "b", "c"};
    grid.cells.assign(3, std::vector<EvalMetrics>(3));
    const auto path = dir.file("grid.md");
    write_cross_model_report(grid, ReportFormat::Markdown, path);
    std::istringstream in(testutil::read_file(path));
    std::string line;
    REQUIRE(std::getline(in, line));
    // "| Metric | Train | a | b | c |" -> 5 columns -> 6 pipes
    CHECK(std::count(line.begin(), line.end(), '|') ==
          static_cast<long>(grid.sources.size() + 2 + 1));
}

TEST_CASE("report emission: JSON round-trips to identical values and bytes") {
    testutil::TempDir dir;
    CrossModelMatrix grid;
    grid.sources = {"x", "y"};
    grid.cells.assign(2, std::vector<EvalMetrics>(2));
    grid.cells[0][0] = {99.948, 100.0, 99.9, 99.95, true, true};
    grid.cells[0][1] = {86.39, 100.0, 76.57, 86.73, true, true};
    grid.cells[1][0] = {93.8, 99.83, 88.59, 93.88, true, true};
    grid.cells[1][1] = {99.94, 100.0, 99.92, 99.96, true, true};

    const auto path1 = dir.file("grid1.json");
    write_cross_model_report(grid, ReportFormat::Json, path1);
    const CrossModelMatrix parsed = read_cross_model_json(path1);
    CHECK(parsed.sources == grid.sources);
    CHECK(parsed.cells[0][0].accuracy == round2(grid.cells[0][0].accuracy));
    CHECK(parsed.cells[0][1].recall == grid.cells[0][1].recall);

    const auto path2 = dir.file("grid2.json");
    write_cross_model_report(parsed, ReportFormat::Json, path2);
    CHECK(testutil::read_file(path1) == testutil::read_file(path2));
}

TEST_CASE("emitted f1 re-derives from emitted precision and recall") {
    testutil::TempDir dir;
    std::mt19937_64 rng(13);
    CrossModelMatrix grid;
    grid.sources = {"a", "b", "c"};
    grid.cells.assign(3, std::vector<EvalMetrics>(3));
    for (auto& row : grid.cells)
        for (auto& cell : row) {
            const long long tp = rng() % 50, fp = rng() % 50, fn = rng() % 50;
            const auto cm = cm_of({"n", "p"}, {{static_cast<long long>(rng() % 50), fp},
                                               {fn, tp + 1}});
            cell = binary_metrics(cm, "p");
        }
    const auto path = dir.file("grid.json");
    write_cross_model_report(grid, ReportFormat::Json, path);
    const CrossModelMatrix parsed = read_cross_model_json(path);
    for (const auto& row : parsed.cells)
        for (const auto& cell : row) {
            if (cell.precision + cell.recall == 0) continue;
            const double rederived =
                2 * cell.precision * cell.recall / (cell.precision + cell.recall);
            CHECK(std::abs(cell.f1 - rederived) <= 0.03);  // rounding slack
        }
}

TEST_CASE("per-class report and confusion outputs") {
    testutil::TempDir dir;
    std::map<std::string, EvalMetrics> per_class;
    per_class["human"] = {99.43, 94.49, 98.62, 96.51, true, true};
    per_class["gpt-4"] = {99.18, 98.57, 97.87, 98.22, true, true};

    const auto csv = dir.file("pc.csv");
    write_per_class_report(per_class, ReportFormat::Csv, csv);
    const std::string csv_text = testutil::read_file(csv);
    CHECK(csv_text.find("class,accuracy,precision,recall,f1\n") == 0);
    CHECK(csv_text.find("gpt-4,99.18,98.57,97.87,98.22\n") != std::string::npos);

    const auto md = dir.file("pc.md");
    write_per_class_report(per_class, ReportFormat::Markdown, md);
    CHECK(testutil::read_file(md).find("| human |") != std::string::npos);

    const auto cm = cm_of({"a", "b"}, {{10, 2}, {1, 12}});
    const auto cm_csv = dir.file("cm.csv");
    write_confusion_csv(cm, cm_csv);
    CHECK(testutil::read_file(cm_csv) == "gold\\predicted,a,b\na,10,2\nb,1,12\n");

    const auto svg1 = dir.file("cm1.svg");
    const auto svg2 = dir.file("cm2.svg");
    write_confusion_svg(cm, svg1);
    write_confusion_svg(cm, svg2);
    CHECK(testutil::read_file(svg1) == testutil::read_file(svg2));
    CHECK(testutil::read_file(svg1).find("<svg") == 0);

    CHECK_THROWS_AS(write_per_class_report(per_class, ReportFormat::Csv,
                                           "/nonexistent-dir/x.csv"),
                    Error);
}

TEST_CASE("rounding is half-up to two decimals") {
    CHECK(round2(85.714285) == doctest::Approx(85.71));
    CHECK(round2(88.885) == doctest::Approx(88.89));
    CHECK(format2(100.0) == "100.00");
    CHECK(format2(0.0) == "0.00");
    CHECK(report_format_from_string("csv") == ReportFormat::Csv);
    CHECK(report_format_from_string("md") == ReportFormat::Markdown);
    CHECK_THROWS_AS(report_format_from_string("xml"), ValidationError);
}
