#pragma once

#include <array>
#include <string_view>

namespace testing_support {

struct RougePair {
  std::string_view candidate;
  std::string_view reference;
};

// Shorter side of every pair stays at or below 16 tokens so the brute-force
// LCS oracle finishes quickly.
inline constexpr std::array<RougePair, 24> kRougePairs = {{
    {"", ""},
    {"", "the cat sat on the mat"},
    {"the cat sat on the mat", ""},
    {"the cat sat on the mat", "the cat sat on the mat"},
    {"apples oranges pears", "trucks boats planes"},
    {"the the the the", "the cat the mat"},
    {"the cat the mat", "the the the the"},
    {"a a b b a a", "a b a b a b"},
    {"the cat sat", "the cat sat on the mat"},
    {"a c e", "a b c d e"},
    {"The Bank issued a $500 million Green Bond.", "the bank issued a green bond worth $500 million"},
    {"police killed the gunman", "the gunman killed police"},
    {"Hello, world! Hello.", "hello hello world"},
    {"... --- !!!", "punctuation only tokens"},
    {"x", "x"},
    {"x", "y"},
    {"one two three four five six seven eight", "eight seven six five four three two one"},
    {"coal loan coal loan coal", "loan coal loan"},
    {"Northbridge Bank arranged financing for a solar farm in Ontario",
     "Northbridge Bank acted as lead arranger on a solar farm financing"},
    {"renewable energy renewable energy", "renewable energy"},
    {"a b c d e f g h i j k l m n o p", "p o n m l k j i h g f e d c b a"},
    {"UPPER lower MiXeD", "upper LOWER mixed"},
    {"new\tlines\nand   tabs", "new lines and tabs"},
    {"green bond green bond green", "social bond green loan green bond"},
}};

}  // namespace testing_support
