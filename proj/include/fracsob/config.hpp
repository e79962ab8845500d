#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace fracsob {

/// Flat "key = value" file. Blank lines and lines starting with '#' are
/// skipped; whitespace around keys and values is trimmed. A repeated key or a
/// line without '=' is rejected with its line number.
std::map<std::string, std::string> parse_config(std::istream& is);
std::map<std::string, std::string> load_config(const std::string& path);

}  // namespace fracsob
