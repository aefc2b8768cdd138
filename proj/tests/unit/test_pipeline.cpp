#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "neolog/pipeline.hpp"
#include "support/testfs.hpp"

using namespace neolog;
using testfs::read_file;
using testfs::tmp_dir;
using testfs::write_file;

namespace {

// Remaining counts recorded for the reference full-scale run, cascade order.
constexpr std::uint64_t k_full_scale[k_stage_count] = {
    124'593'754, 113'909'871, 23'955'763, 10'793'055, 7'065'796,
    208'932,     174'973,     10'499,     1'021,
};

cascade_report full_scale_report() {
    cascade_report rep;
    std::uint64_t prev = 0;
    for (int i = 0; i < k_stage_count; ++i) {
        stage_row row;
        row.st = static_cast<stage>(i);
        row.name = std::string(stage_display_name(row.st));
        row.remaining = k_full_scale[i];
        // reintegration happens only at the frequency gate
        row.reintegrated = row.st == stage::freq ? 118'544 : 0;
        row.removed = i == 0 ? 0 : prev + row.reintegrated - row.remaining;
        prev = row.remaining;
        rep.rows.push_back(row);
    }
    return rep;
}

// A self-contained miniature run: one planted coinage that must survive
// every stage, plus known-word, spam, typo, concat, and foreign chaff.
struct mini_setup {
    tmp_dir dir{"mini"};
    pipeline_config cfg;

    explicit mini_setup(int posts_per_token = 12) {
        std::string corpus;
        auto add_posts = [&](const std::string& word, int n) {
            for (int i = 0; i < n; ++i) {
                corpus += R"({"id":")" + word + std::to_string(i) + R"(","body":"the )" + word +
                          R"( thing","subreddit":"s)" + std::to_string(i % 4) +
                          R"(","created_utc":)" + std::to_string(1600000000 + i) + "}\n";
            }
        };
        add_posts("blorbify", posts_per_token);      // the planted coinage
        add_posts("keyboard", posts_per_token);      // known word, vocab removes
        add_posts("aaaaaaab", posts_per_token);      // spam, pattern removes
        add_posts("datingapp", posts_per_token);     // concat, flagged then reintegrated
        add_posts("keybaord", 3);                    // typo below the threshold
        add_posts("nagmahal", posts_per_token);      // foreign, lang removes
        add_posts("hapaxlegomenon", 1);              // clean but too rare

        write_file(dir.file("corpus.ndjson"), corpus);
        write_file(dir.file("vocab.txt"), "the\nkeyboard\nthing\ndating\napp\nhello\n");
        write_file(dir.file("manifest.tsv"), "base\tvocab.txt\t2014-12-31\n");
        write_file(dir.file("dict.tsv"), "dating\t5000\napp\t9000\nhello\t5000\nkeyboard\t800\n");
        write_file(dir.file("stopwords.txt"), "the\n");
        write_file(dir.file("labels.tsv"),
                   "blorbify\tNEOLOGISM\ndatingapp\tNONE\nkeybaord\tNONE\nnagmahal\tFOREIGN\n");

        cfg.corpus = dir.file("corpus.ndjson");
        cfg.workdir = dir.file("work");
        cfg.stopwords = dir.file("stopwords.txt");
        cfg.rulepack = testfs::source_path("data/rulepacks/en.rules");
        cfg.vocab_manifest = dir.file("manifest.tsv");
        cfg.freq_dict = dir.file("dict.tsv");
        cfg.lang_profiles = testfs::source_path("data/lang_profiles");
        cfg.freq_threshold = 10;
        cfg.typo_freq_floor = 100;
        for (int v = 1; v <= 3; ++v) {
            cfg.set("voter." + std::to_string(v) + ".provider", "mock");
            cfg.set("voter." + std::to_string(v) + ".mock_table", dir.file("labels.tsv"));
            cfg.set("voter." + std::to_string(v) + ".rpm", "600000");
        }
        cfg.set("verifier.provider", "mock");
        cfg.set("verifier.mock_table", dir.file("labels.tsv"));
        cfg.set("verifier.rpm", "600000");
        cfg.validate();
    }
};

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("compression ratio formats as reported") {
    CHECK(format_compression(124'593'754, 1'021) == "122,031:1");
    CHECK(format_compression(100, 100) == "1:1");
    CHECK(format_compression(1'999, 1'000) == "2:1");
    CHECK(format_compression(12'345, 0) == "∞");
}

TEST_CASE("the full-scale cascade conserves and compresses") {
    auto rep = full_scale_report();
    CHECK_NOTHROW(rep.validate());
    CHECK(rep.initial_types() == 124'593'754);
    CHECK(rep.final_count() == 1'021);
    CHECK(format_compression(rep.initial_types(), rep.final_count()) == "122,031:1");

    auto text = rep.render_text();
    CHECK(text.find("122,031:1") != std::string::npos);
    CHECK(text.find("Freq. threshold + reintegration") != std::string::npos);
    CHECK(text.find("118,544") != std::string::npos);
    CHECK(text.find("Majority vote (NEOLOGISM)") != std::string::npos);
}

TEST_CASE("conservation violations are fatal") {
    auto rep = full_scale_report();
    rep.rows[3].remaining += 1;
    CHECK_THROWS_AS(rep.validate(), std::logic_error);
}

TEST_CASE("reports round-trip through json") {
    auto rep = full_scale_report();
    auto back = cascade_report::from_json(rep.to_json());
    REQUIRE(back.rows.size() == rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(back.rows[i].name == rep.rows[i].name);
        CHECK(back.rows[i].remaining == rep.rows[i].remaining);
        CHECK(back.rows[i].removed == rep.rows[i].removed);
        CHECK(back.rows[i].reintegrated == rep.rows[i].reintegrated);
    }
    CHECK_NOTHROW(back.validate());
}

TEST_CASE("externally recorded counts rebuild the ratio") {
    tmp_dir t("counts");
    std::string text;
    for (int i = 0; i < k_stage_count; ++i) {
        text += std::string(stage_display_name(static_cast<stage>(i))) + "\t" +
                std::to_string(k_full_scale[i]) + "\n";
    }
    write_file(t.file("counts.tsv"), text);
    auto rep = cascade_report::from_counts_file(t.file("counts.tsv"));
    REQUIRE(rep.rows.size() == k_stage_count);
    CHECK(format_compression(rep.initial_types(), rep.final_count()) == "122,031:1");
}

TEST_CASE("an empty corpus yields an all-zero cascade") {
    tmp_dir t("empty");
    write_file(t.file("corpus.ndjson"), "");
    write_file(t.file("stopwords.txt"), "");
    write_file(t.file("dict.tsv"), "hello\t100\n");
    write_file(t.file("labels.tsv"), "");
    pipeline_config cfg;
    cfg.corpus = t.file("corpus.ndjson");
    cfg.workdir = t.file("work");
    cfg.stopwords = t.file("stopwords.txt");
    cfg.rulepack = testfs::source_path("data/rulepacks/en.rules");
    cfg.freq_dict = t.file("dict.tsv");
    cfg.lang_profiles = testfs::source_path("data/lang_profiles");
    for (int v = 1; v <= 3; ++v) {
        cfg.set("voter." + std::to_string(v) + ".provider", "mock");
        cfg.set("voter." + std::to_string(v) + ".mock_table", t.file("labels.tsv"));
    }

    auto res = run_pipeline(cfg);
    REQUIRE(res.report.rows.size() == k_stage_count);
    for (const auto& row : res.report.rows) {
        CHECK(row.remaining == 0);
        CHECK(row.removed == 0);
        CHECK(row.reintegrated == 0);
    }
    // header-only export: no data rows
    auto final_text = read_file(res.final_path);
    CHECK(final_text.rfind("#", 0) == 0);
    CHECK(final_text.find('\n') == final_text.size() - 1);
    CHECK(res.report.render_text().find("∞") != std::string::npos);
}

TEST_CASE("a planted coinage survives the whole cascade") {
    mini_setup m;
    auto res = run_pipeline(m.cfg);
    CHECK_NOTHROW(res.report.validate());

    auto final_text = read_file(res.final_path);
    CHECK(final_text.find("blorbify") != std::string::npos);
    CHECK(final_text.find("keyboard\t") == std::string::npos);  // known word
    CHECK(final_text.find("aaaaaaab") == std::string::npos);    // spam
    CHECK(final_text.find("keybaord") == std::string::npos);    // rare typo
    CHECK(final_text.find("nagmahal") == std::string::npos);    // foreign
    CHECK(final_text.find("datingapp") == std::string::npos);   // voted NONE

    // the reintegrated concatenation is still visible mid-cascade with its flag
    auto freq_ck = read_file(std::filesystem::path(m.cfg.workdir) / "05-freq.tsv");
    CHECK(freq_ck.find("datingapp\t") != std::string::npos);
    CHECK(freq_ck.find("\tC") != std::string::npos);

    // candidate export carries votes, majority, and the verifier verdict
    auto cand = read_file(res.candidates_path);
    CHECK(cand.find("\"surface\":\"blorbify\"") != std::string::npos);
    CHECK(cand.find("\"majority\":\"NEOLOGISM\"") != std::string::npos);
    CHECK(cand.find("\"verifier\":\"NEOLOGISM\"") != std::string::npos);

    // per-stage accounting: spam died at the pattern stage
    CHECK(res.report.rows[int(stage::pattern)].removed >= 1);
    CHECK(res.report.rows[int(stage::freq)].reintegrated >= 1);
}

TEST_CASE("a finished run resumes without touching the corpus") {
    mini_setup m;
    auto first = run_pipeline(m.cfg);
    CHECK(first.reader.yielded > 0);

    auto second = run_pipeline(m.cfg);
    CHECK(second.reader.yielded == 0);  // everything reloaded from checkpoints
    CHECK(read_file(first.final_path) == read_file(second.final_path));
    CHECK(read_file(first.candidates_path) == read_file(second.candidates_path));
}

TEST_CASE("a config edit reruns only its own stage and later ones") {
    mini_setup m;
    run_pipeline(m.cfg);
    auto tokenize_ck = std::filesystem::path(m.cfg.workdir) / "00-tokenize.tsv";
    auto before = std::filesystem::last_write_time(tokenize_ck);

    m.cfg.freq_threshold = 11;  // invalidates the frequency gate onwards
    auto res = run_pipeline(m.cfg);
    CHECK(std::filesystem::last_write_time(tokenize_ck) == before);
    CHECK(res.reader.yielded == 0);  // tokenization was reused, not rerun
    CHECK_NOTHROW(res.report.validate());
}

TEST_CASE("stopping early leaves a resumable prefix") {
    mini_setup m;
    run_options opts;
    opts.stop_after = stage::pattern;
    auto partial = run_pipeline(m.cfg, opts);
    CHECK(partial.report.rows.size() == 3);
    CHECK(partial.candidates_path.empty());

    auto full = run_pipeline(m.cfg);
    REQUIRE(full.report.rows.size() == k_stage_count);
    CHECK(full.reader.yielded == 0);  // prefix reused
    CHECK(read_file(full.final_path).find("blorbify") != std::string::npos);
}

TEST_CASE("context harvesting is checkpointed and reused") {
    mini_setup m;
    auto path = ensure_contexts(m.cfg);
    REQUIRE(std::filesystem::exists(path));
    auto first = read_file(path);
    CHECK(first.find("blorbify") != std::string::npos);
    CHECK(ensure_contexts(m.cfg) == path);
    CHECK(read_file(path) == first);
}

TEST_CASE("the flat export mirrors the candidate records") {
    mini_setup m;
    auto res = run_pipeline(m.cfg);
    auto out = m.dir.file("cands.tsv");
    export_candidates_tsv(res.candidates_path, out);
    auto text = read_file(out);
    CHECK(text.find("surface\t") != std::string::npos);
    CHECK(text.find("vote:voter1") != std::string::npos);
    CHECK(text.find("blorbify") != std::string::npos);
    CHECK(text.find("NEOLOGISM") != std::string::npos);
}

TEST_SUITE_END();
