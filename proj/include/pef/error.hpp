#pragma once

#include <stdexcept>
#include <string>

namespace pef {

// Single exception type; the message is a one-line, machine-parseable
// "category: detail" string so the CLI can forward it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& detail)
      : std::runtime_error(category + ": " + detail),
        category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

}  // namespace pef
