#pragma once

#include <string>
#include <string_view>

namespace implcons {

/// A yes/no question with its answer.
struct BinaryQA {
  std::string question;
  std::string answer;
};

/// Rewrites a binary QA pair as a declarative sentence.
///
/// The fronted verb and the subject token swap places, the question mark
/// becomes a full stop, and the first letter is capitalized:
///   ("Is it winter?", "yes") -> "It is winter."
/// A "no" answer inserts "not" after the verb, which covers both copulas
/// ("It is not winter.") and do-support ("It does not rain.").
///
/// Accepted leading verbs: Is, Are, Was, Were, Does, Do, Did, Can, Has,
/// Have. Anything else, a missing "?", or a non-binary answer throws
/// UnsupportedQuestionError.
std::string qa_to_proposition(const BinaryQA& qa);

}  // namespace implcons
