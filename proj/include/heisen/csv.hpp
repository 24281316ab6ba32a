#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace heisen {

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// Parses "key=value" tokens following `tag` in a header line such as
// "# grid d=1 nx=4". Returns false if the line does not start with tag.
bool parse_header(std::string_view line, std::string_view tag, std::map<std::string, std::string>& kv);

std::vector<std::string> split_csv(std::string_view line);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

// Writes `content` to `path` via a temporary file and rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace heisen
