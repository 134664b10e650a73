#include "commonlibs/errors.h"

namespace commonlibs {

namespace {

std::string render(const std::vector<ParseFailure>& failures) {
  std::string out;
  for (const auto& f : failures) {
    if (!out.empty()) {
      out += '\n';
    }
    out += f.file + ":" + std::to_string(f.line) + ": " + f.message;
  }
  return out;
}

} // namespace

ParseError::ParseError(std::vector<ParseFailure> failures)
    : Error(render(failures)), failures_(std::move(failures)) {}

ParseError::ParseError(std::string file, int line, std::string message)
    : ParseError(std::vector<ParseFailure>{
          ParseFailure{std::move(file), line, std::move(message)}}) {}

} // namespace commonlibs
