#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mgtkit/corpus.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& capture = "") {
    std::string cmd = std::string(MGTKIT_BIN) + " " + args;
    cmd += capture.empty() ? " >/dev/null 2>&1" : " >" + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string make_corpus_file(const testutil::TempDir& dir, const std::string& name,
                             const mgtkit::Corpus& corpus) {
    const auto path = dir.file(name);
    mgtkit::save_corpus(corpus, path);
    return path;
}

mgtkit::Corpus wide_vocab_corpus(std::size_t n_docs, std::uint64_t seed,
                                 const std::string& prefix) {
    // >100 distinct tokens so zipf --k 100 has a full vocabulary
    std::mt19937_64 rng(seed);
    mgtkit::Corpus corpus;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        for (int i = 0; i < 80; ++i) {
            if (i) text += ' ';
            // zipf-ish: low token ids much more likely
            const std::size_t pick = std::min<std::size_t>(rng() % 140, rng() % 140);
            text += "w" + std::to_string(pick);
        }
        corpus.documents.push_back(mgtkit::make_document(prefix + std::to_string(d), text,
                                                         mgtkit::Authorship::human(),
                                                         mgtkit::Domain::AcademicAbstract,
                                                         mgtkit::GenMethod::None));
    }
    return corpus;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("stats --no-such-flag x") == 2);
}

TEST_CASE("validation failures exit with code 1") {
    testutil::TempDir dir;
    CHECK(run_cli("stats --input " + dir.file("missing.jsonl")) == 1);
}

TEST_CASE("stats prints length statistics") {
    testutil::TempDir dir;
    const auto corpus = testutil::synthetic_corpus(10, 50, "human", {}, 0.0, 1, "d");
    const auto input = make_corpus_file(dir, "c.jsonl", corpus);
    const auto capture = dir.file("stats.out");
    CHECK(run_cli("stats --input " + input + " --domain abstract --out " + dir.file("out"),
                  capture) == 0);
    const std::string output = testutil::read_file(capture);
    CHECK(output.find("n=10") != std::string::npos);
    CHECK(output.find("avg=50.0") != std::string::npos);
    CHECK(fs::exists(dir.file("out") + "/stats.csv"));
    CHECK(fs::exists(dir.file("out") + "/manifest.json"));
}

TEST_CASE("ingest filters and reports") {
    testutil::TempDir dir;
    mgtkit::Corpus corpus = testutil::synthetic_corpus(5, 50, "m1", {}, 0.0, 2, "keep");
    corpus.documents.push_back(mgtkit::make_document("short", "too short",
                                                     mgtkit::Authorship::model("m1"),
                                                     mgtkit::Domain::AcademicAbstract,
                                                     mgtkit::GenMethod::Polish));
    const auto input = make_corpus_file(dir, "gen.jsonl", corpus);
    const auto out = dir.file("ingested");
    CHECK(run_cli("ingest --input " + input + " --domain abstract --out " + out) == 0);
    CHECK(fs::exists(out + "/filtered.jsonl"));
    const std::string report = testutil::read_file(out + "/filter_report.csv");
    CHECK(report.find("too_short,1") != std::string::npos);
    const auto filtered = mgtkit::load_corpus(out + "/filtered.jsonl",
                                              mgtkit::Domain::AcademicAbstract);
    CHECK(filtered.size() == 5);
    // inputs are never mutated
    CHECK(testutil::read_file(input).find("too short") != std::string::npos);
}

TEST_CASE("zipf emits k-row curves, slopes and an SVG") {
    testutil::TempDir dir;
    const auto input = make_corpus_file(dir, "z.jsonl", wide_vocab_corpus(60, 3, "z"));
    const auto out = dir.file("zipf_out");
    CHECK(run_cli("zipf --input human=" + input +
                  " --domain abstract --k 100 --stopwords none --out " + out) == 0);
    const std::string curve = testutil::read_file(out + "/curve_human.csv");
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 101);  // header + 100 rows
    CHECK(fs::exists(out + "/zipf.svg"));
    CHECK(fs::exists(out + "/slopes.csv"));
    CHECK(fs::exists(out + "/manifest.json"));
}

TEST_CASE("freq writes tables, top-k and overlap") {
    testutil::TempDir dir;
    const auto human = make_corpus_file(dir, "h.jsonl", wide_vocab_corpus(20, 4, "h"));
    const auto m1 = make_corpus_file(
        dir, "m1.jsonl", testutil::synthetic_corpus(20, 60, "m1", {"mk1"}, 0.2, 5, "a"));
    const auto m2 = make_corpus_file(
        dir, "m2.jsonl", testutil::synthetic_corpus(20, 60, "m2", {"mk2"}, 0.2, 6, "b"));
    const auto out = dir.file("freq_out");
    CHECK(run_cli("freq --human " + human + " --machine m1=" + m1 + " --machine m2=" + m2 +
                  " --domain abstract --k 10 --stopwords none --out " + out) == 0);
    CHECK(fs::exists(out + "/freq_human.csv"));
    CHECK(fs::exists(out + "/freq_m1.csv"));
    CHECK(fs::exists(out + "/topk.csv"));
    const std::string overlap = testutil::read_file(out + "/overlap.csv");
    CHECK(overlap.find("token,category,stable_position") == 0);
}

TEST_CASE("compare scores candidate/reference pairs") {
    testutil::TempDir dir;
    const auto refs = testutil::synthetic_corpus(6, 40, "human", {}, 0.0, 7, "p");
    mgtkit::Corpus cands;
    for (const auto& doc : refs.documents)
        cands.documents.push_back(mgtkit::make_document(doc.id + ":m:polish", doc.text,
                                                        mgtkit::Authorship::model("m"),
                                                        doc.domain, mgtkit::GenMethod::Polish));
    const auto ref_path = make_corpus_file(dir, "refs.jsonl", refs);
    const auto cand_path = make_corpus_file(dir, "cands.jsonl", cands);
    const auto out = dir.file("cmp_out");
    const auto capture = dir.file("cmp.log");
    CHECK(run_cli("compare --candidates " + cand_path + " --references " + ref_path +
                      " --domain abstract --pair-by id --out " + out,
                  capture) == 0);
    const std::string scores = testutil::read_file(out + "/scores.csv");
    // identical texts: all reference metrics at 100
    CHECK(scores.find("bleu,100.00") != std::string::npos);
    CHECK(scores.find("rouge_l,100.00") != std::string::npos);
    CHECK(scores.find("bertscore_f,100.00") != std::string::npos);
}

TEST_CASE("train is reproducible and evaluate consumes its artifacts") {
    testutil::TempDir dir;
    const auto human = make_corpus_file(
        dir, "h.jsonl", testutil::synthetic_corpus(120, 60, "human", {}, 0.0, 8, "h"));
    const auto machine = make_corpus_file(
        dir, "m.jsonl",
        testutil::synthetic_corpus(120, 60, "gen1", {"qqmark"}, 0.25, 9, "m"));
    const auto config = dir.file("config.json");
    testutil::write_file(config,
                         "{\"features\":{\"hashed_dims\":512},"
                         "\"train\":{\"max_epochs\":3}}");

    const auto out1 = dir.file("run1");
    const auto out2 = dir.file("run2");
    const std::string train_args = " train --human " + human + " --machine gen1=" + machine +
                                   " --domain abstract --seed 5 --out ";
    CHECK(run_cli("--config " + config + train_args + out1) == 0);
    CHECK(run_cli("--config " + config + train_args + out2) == 0);
    CHECK(testutil::read_file(out1 + "/model.json") == testutil::read_file(out2 + "/model.json"));
    CHECK(fs::exists(out1 + "/feature_spec.json"));
    CHECK(fs::exists(out1 + "/manifest.json"));

    const auto eval_out = dir.file("eval");
    CHECK(run_cli("evaluate --model " + out1 + "/model.json --feature-spec " + out1 +
                  "/feature_spec.json --input " + machine + " --domain abstract --out " +
                  eval_out) == 0);
    CHECK(fs::exists(eval_out + "/metrics.csv"));
    CHECK(fs::exists(eval_out + "/confusion.csv"));
    CHECK(fs::exists(eval_out + "/confusion.svg"));
}

TEST_CASE("cross-eval, report and multiclass-eval round-trip") {
    testutil::TempDir dir;
    const auto human = make_corpus_file(
        dir, "h.jsonl", testutil::synthetic_corpus(80, 50, "human", {}, 0.0, 10, "h"));
    const auto m1 = make_corpus_file(
        dir, "m1.jsonl", testutil::synthetic_corpus(80, 50, "m1", {"aak"}, 0.25, 11, "a"));
    const auto m2 = make_corpus_file(
        dir, "m2.jsonl", testutil::synthetic_corpus(80, 50, "m2", {"bbk"}, 0.25, 12, "b"));
    const auto config = dir.file("config.json");
    testutil::write_file(config,
                         "{\"features\":{\"hashed_dims\":256},"
                         "\"train\":{\"max_epochs\":2}}");

    const auto cross_out = dir.file("cross");
    CHECK(run_cli("--config " + config + " cross-eval --human " + human + " --machine m1=" + m1 +
                  " --machine m2=" + m2 + " --domain abstract --format csv --out " +
                  cross_out) == 0);
    CHECK(fs::exists(cross_out + "/cross_model.json"));
    const std::string csv = testutil::read_file(cross_out + "/cross_model.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 2x2 grid

    const auto report_out = dir.file("report");
    CHECK(run_cli("report --results " + cross_out + "/cross_model.json --format markdown --out " +
                  report_out) == 0);
    const std::string md = testutil::read_file(report_out + "/report.md");
    CHECK(md.find("| Metric | Train |") == 0);

    const auto multi_out = dir.file("multi");
    CHECK(run_cli("--config " + config + " multiclass-eval --human " + human + " --machine m1=" +
                  m1 + " --machine m2=" + m2 + " --domain abstract --format csv --out " +
                  multi_out) == 0);
    CHECK(fs::exists(multi_out + "/per_class.csv"));
    CHECK(fs::exists(multi_out + "/confusion.svg"));
    const std::string per_class = testutil::read_file(multi_out + "/per_class.csv");
    CHECK(per_class.find("human") != std::string::npos);
    CHECK(per_class.find("m1") != std::string::npos);
}

TEST_CASE("generate drives a chat provider end to end") {
    httplib::Server server;
    server.Post("/v1/chat/completions",
                [](const httplib::Request&, httplib::Response& res) {
                    std::string text = "نص مولد طويل بما يكفي ليتجاوز حد الثلاثين كلمة";
                    for (int i = 0; i < 30; ++i) text += " كلمة" + std::to_string(i);
                    res.set_content("{\"text\":\"" + text + "\"}", "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    testutil::TempDir dir;
    const auto input = make_corpus_file(
        dir, "src.jsonl", testutil::synthetic_corpus(3, 40, "human", {}, 0.0, 13, "s"));
    const auto out = dir.file("gen_out");
    const int code =
        run_cli("generate --input " + input + " --domain abstract --strategy polish "
                "--model test-llm --endpoint http://127.0.0.1:" +
                std::to_string(port) + " --out " + out);
    server.stop();
    listener.join();
    CHECK(code == 0);

    const auto accepted =
        mgtkit::load_corpus(out + "/accepted.jsonl", mgtkit::Domain::AcademicAbstract);
    CHECK(accepted.size() == 3);
    CHECK(accepted.documents[0].label == mgtkit::Authorship::model("test-llm"));
    const std::string log = testutil::read_file(out + "/generation_log.jsonl");
    CHECK(std::count(log.begin(), log.end(), '\n') == 3);
    CHECK(log.find("\"attempts\":1") != std::string::npos);
}
