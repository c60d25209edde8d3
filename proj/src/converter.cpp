#include "implcons/converter.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <vector>

#include "implcons/errors.hpp"
#include "implcons/metric.hpp"

namespace implcons {

namespace {

constexpr std::array<std::string_view, 10> kFrontedVerbs = {
    "is", "are", "was", "were", "does", "do", "did", "can", "has", "have"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string qa_to_proposition(const BinaryQA& qa) {
  const auto answer = normalize_answer(qa.answer);
  if (answer != "yes" && answer != "no") {
    throw UnsupportedQuestionError("answer '" + qa.answer + "' is not yes/no");
  }

  std::vector<std::string> tokens;
  std::istringstream in(qa.question);
  for (std::string t; in >> t;) tokens.push_back(std::move(t));
  if (tokens.empty() || tokens.back().back() != '?') {
    throw UnsupportedQuestionError("'" + qa.question + "' does not end with '?'");
  }
  tokens.back().pop_back();
  if (tokens.back().empty()) tokens.pop_back();
  if (tokens.empty()) throw UnsupportedQuestionError("empty question");
  if (std::any_of(tokens.begin(), tokens.end(),
                  [](const std::string& t) { return t.find('?') != std::string::npos; })) {
    throw UnsupportedQuestionError("'" + qa.question + "' has more than one '?'");
  }
  if (tokens.size() < 2) {
    throw UnsupportedQuestionError("'" + qa.question + "' has no subject after the verb");
  }
  auto verb = lower(tokens[0]);
  if (std::find(kFrontedVerbs.begin(), kFrontedVerbs.end(), verb) == kFrontedVerbs.end()) {
    throw UnsupportedQuestionError("'" + qa.question + "' does not start with a fronted verb");
  }

  std::vector<std::string> out{tokens[1], verb};
  if (answer == "no") out.emplace_back("not");
  out.insert(out.end(), tokens.begin() + 2, tokens.end());

  std::string sentence;
  for (const auto& t : out) {
    if (!sentence.empty()) sentence += ' ';
    sentence += t;
  }
  sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
  sentence += '.';
  return sentence;
}

}  // namespace implcons
