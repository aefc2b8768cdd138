#pragma once

// The frozen 10-token prompt batch behind prompts/golden_multi.txt and
// prompts/golden_single.txt. Regenerate the goldens from exactly this
// batch if the templates ever change deliberately.

#include <vector>

#include "neolog/classify.hpp"

namespace neolog::testsupport {

inline std::vector<prompt_item> golden_batch() {
    return {
        {"blorbo",
         {{"TVCriticism", "my absolute blorbo of all time, no contest"},
          {"fanfiction", "everyone has a blorbo from their shows"},
          {"AskReddit", "calling him my blorbo feels right"}}},
        {"updoot",
         {{"memes", "take my updoot and leave"},
          {"AskReddit", "this deserves an updoot, friend"}}},
        {"tradwife", {{"relationships", "she said the \"tradwife\" life wasn't for her"}}},
        {"covidiot",
         {{"news", "some covidiot licked the subway pole"},
          {"AskReddit", "my neighbor is a total covidiot about masks"},
          {"politics", "covidiot behavior at the rally again"}}},
        {"goblincore",
         {{"fashion", "thrifted a whole goblincore outfit today"},
          {"aesthetics", "mushrooms, moss and goblincore vibes"}}},
        {"finfluencer",
         {{"investing", "another finfluencer shilling a coin"},
          {"personalfinance", "don't trust a finfluencer with your savings"}}},
        {"deplatform",
         {{"technology", "they moved to deplatform the channel"},
          {"politics", "calls to deplatform him grew louder"}}},
        {"breadcrumbing",
         {{"dating", "he kept breadcrumbing her for months"},
          {"relationships", "classic breadcrumbing, block and move on"}}},
        {"wokeism",
         {{"politics", "he blames wokeism for everything"},
          {"unpopularopinion", "wokeism isn't what ruined the show"}}},
        {"longcovid",
         {{"covid19", "dealing with longcovid fatigue since march"},
          {"health", "longcovid support thread, share your story"},
          {"science", "new longcovid study on \\ markers"}}},
    };
}

}  // namespace neolog::testsupport
