#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "neolog/freq.hpp"

using namespace neolog;

namespace {

token_type tok(const char* s, std::uint64_t count, bool typo = false, bool concat = false,
               std::uint32_t subs = 1) {
    token_type t;
    t.surface = s;
    t.count = count;
    t.flag_typo = typo;
    t.flag_concat = concat;
    t.n_subs = subs;
    return t;
}

std::set<std::string> surfaces(const std::vector<token_type>& ts) {
    std::set<std::string> out;
    for (const auto& t : ts) out.insert(t.surface);
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("freq");

TEST_CASE("an unflagged token below the threshold is dropped") {
    std::vector<token_type> ts = {tok("rareword", 99)};
    auto stats = freq_gate(ts, 100);
    CHECK(ts.empty());
    CHECK(stats.dropped_low_clean == 1);
    CHECK(stats.kept_clean == 0);
    CHECK(stats.reintegrated() == 0);
}

TEST_CASE("an unflagged token at the threshold survives") {
    std::vector<token_type> ts = {tok("justenough", 100)};
    auto stats = freq_gate(ts, 100);
    REQUIRE(ts.size() == 1);
    CHECK(stats.kept_clean == 1);
}

TEST_CASE("a high-frequency typo-flagged token is reintegrated") {
    std::vector<token_type> ts = {tok("vtuber", 41024, /*typo=*/true)};
    auto stats = freq_gate(ts, 100);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].surface == "vtuber");
    CHECK(ts[0].flag_typo);  // the flag stays on for the trace
    CHECK(stats.reintegrated_typo == 1);
    CHECK(stats.reintegrated_concat == 0);
    CHECK(stats.kept_clean == 0);
}

TEST_CASE("a high-frequency concatenation-flagged token is reintegrated") {
    std::vector<token_type> ts = {tok("datingapp", 150, /*typo=*/false, /*concat=*/true)};
    auto stats = freq_gate(ts, 100);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].flag_concat);
    CHECK(stats.reintegrated_concat == 1);
}

TEST_CASE("a low-frequency flagged token stays dropped") {
    std::vector<token_type> ts = {tok("helllo", 42, /*typo=*/true)};
    auto stats = freq_gate(ts, 100);
    CHECK(ts.empty());
    CHECK(stats.dropped_low_flagged == 1);
    CHECK(stats.dropped() == 1);
}

TEST_CASE("survivors equal a brute-force filter") {
    std::mt19937_64 rng(29);
    std::vector<token_type> ts;
    for (int i = 0; i < 500; ++i) {
        auto t = tok(("w" + std::to_string(i)).c_str(), rng() % 300);
        t.flag_typo = rng() % 4 == 0;
        t.flag_concat = !t.flag_typo && rng() % 5 == 0;
        ts.push_back(t);
    }
    std::set<std::string> brute;
    std::uint64_t brute_reint = 0;
    for (const auto& t : ts) {
        if (t.count >= 100) {
            brute.insert(t.surface);
            if (t.flagged()) ++brute_reint;
        }
    }
    auto copy = ts;
    auto stats = freq_gate(copy, 100);
    CHECK(surfaces(copy) == brute);
    CHECK(stats.reintegrated() == brute_reint);
    CHECK(stats.kept_clean + stats.dropped() + stats.reintegrated() == ts.size());
}

TEST_CASE("raising the threshold never adds survivors") {
    std::mt19937_64 rng(31);
    std::vector<token_type> base;
    for (int i = 0; i < 300; ++i) {
        auto t = tok(("t" + std::to_string(i)).c_str(), rng() % 500);
        t.flag_typo = rng() % 3 == 0;
        base.push_back(t);
    }
    std::set<std::string> prev;
    bool first = true;
    for (std::uint64_t threshold : {0ULL, 50ULL, 100ULL, 200ULL, 400ULL, 1000ULL}) {
        auto copy = base;
        freq_gate(copy, threshold);
        auto cur = surfaces(copy);
        if (!first) {
            for (const auto& s : cur) CHECK(prev.count(s) == 1);
        }
        prev = std::move(cur);
        first = false;
    }
}

TEST_CASE("the optional dispersion floor removes single-community tokens") {
    std::vector<token_type> ts = {tok("everywhere", 500, false, false, 4),
                                  tok("onesub", 500, false, false, 1)};
    auto copy = ts;
    freq_gate(copy, 100, /*min_subreddits=*/0);  // hook off: both survive
    CHECK(copy.size() == 2);

    freq_gate(ts, 100, /*min_subreddits=*/2);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].surface == "everywhere");
}

TEST_SUITE_END();
