// Microbenchmarks for the per-token hot paths. Loads the shipped rule
// pack and language profiles so the numbers reflect the real operating
// point, not toy configurations.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "neolog/config.hpp"
#include "neolog/corpus.hpp"
#include "neolog/lang.hpp"
#include "neolog/pattern.hpp"
#include "neolog/spell.hpp"

using namespace neolog;

#ifndef NEOLOG_SOURCE_DIR
#define NEOLOG_SOURCE_DIR "."
#endif

namespace {

std::string source_path(const char* rel) {
    return std::string(NEOLOG_SOURCE_DIR) + "/" + rel;
}

std::vector<std::string> make_words(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    out.reserve(n);
    while (out.size() < n) {
        std::string w;
        const std::size_t len = 4 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng() % 26);
        out.push_back(std::move(w));
    }
    return out;
}

frequency_dict make_dict(const std::vector<std::string>& words, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    frequency_dict d;
    for (const auto& w : words) d.add(w, 1 + rng() % 100'000);
    return d;
}

const std::string k_post_body =
    "Check https://example.com/some/long/path?q=1 for details — r/AskReddit "
    "and u/someone_else were discussing it. The quick brown fox jumps over "
    "the lazy dog while doomscrolling through #trending posts about whether "
    "breadcrumbing counts as a red flag; honestly the whole thread was a "
    "goblincore mood board with updoots all around.";

}  // namespace

static void bm_preprocess_tokenize(benchmark::State& state) {
    const auto stopwords = load_stopwords(source_path("data/stopwords/en.txt"));
    for (auto _ : state) {
        auto tokens = tokenize(preprocess(k_post_body), stopwords);
        benchmark::DoNotOptimize(tokens);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(k_post_body.size()));
}
BENCHMARK(bm_preprocess_tokenize);

static void bm_pattern_check(benchmark::State& state) {
    auto rules = pattern_rule_set::load(source_path("data/rulepacks/en.rules"));
    const char* tokens[] = {"keyboard",  "blorbify",   "aaaaaaab", "qwertyasdf",
                            "hahahahaha", "xylograph",  "zzzkjqx",  "understand",
                            "lol",        "datingapp"};
    std::size_t i = 0;
    for (auto _ : state) {
        auto d = pattern_check(tokens[i++ % 10], rules);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(bm_pattern_check);

static void bm_osa_bounded(benchmark::State& state) {
    const auto words = make_words(512, 7);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& a = words[i % words.size()];
        const auto& b = words[(i * 31 + 7) % words.size()];
        ++i;
        benchmark::DoNotOptimize(osa_distance_bounded(a, b, 2));
    }
}
BENCHMARK(bm_osa_bounded);

static void bm_index_build(benchmark::State& state) {
    const auto words = make_words(static_cast<std::size_t>(state.range(0)), 11);
    const auto dict = make_dict(words, 13);
    for (auto _ : state) {
        delete_index idx(dict, 2);
        benchmark::DoNotOptimize(idx);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_index_build)->Arg(1000)->Arg(10000)->Arg(50000);

static void bm_typo_check(benchmark::State& state) {
    const auto words = make_words(50'000, 17);
    const auto dict = make_dict(words, 19);
    const delete_index index(dict, 2);
    std::mt19937_64 rng(23);
    std::vector<std::string> queries;
    for (int i = 0; i < 4096; ++i) {
        auto w = words[rng() % words.size()];
        w[rng() % w.size()] = static_cast<char>('a' + rng() % 26);  // one edit
        queries.push_back(std::move(w));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        auto v = typo_check(queries[i++ % queries.size()], index, dict, 5, 100);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_typo_check);

static void bm_segment(benchmark::State& state) {
    const auto words = make_words(50'000, 29);
    const auto dict = make_dict(words, 31);
    std::mt19937_64 rng(37);
    std::vector<std::string> queries;
    for (int i = 0; i < 4096; ++i)
        queries.push_back(words[rng() % words.size()] + words[rng() % words.size()]);
    std::size_t i = 0;
    for (auto _ : state) {
        auto v = segment(queries[i++ % queries.size()], dict, 6, 3);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_segment);

static void bm_lang_detect(benchmark::State& state) {
    ngram_detector det("en");
    if (det.load_profiles(source_path("data/lang_profiles"), default_lang_inventory()).size() < 2)
        state.SkipWithError("language profiles not found");
    const char* tokens[] = {"keyboard", "nagmahal", "understand", "mariposa",
                            "blorbify", "gemutlich", "doomscroll", "saudade"};
    std::size_t i = 0;
    for (auto _ : state) {
        auto v = det.detect(tokens[i++ % 8]);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_lang_detect);

BENCHMARK_MAIN();
