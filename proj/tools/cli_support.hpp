#pragma once

// Helpers for the oica command-line front end: grid strings and flat
// key=value config files.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oica::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& token) {
  const std::string t = trim(token);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw UsageError("not a number: '" + t + "'");
  return v;
}

/**
 * Parses "a,b,c" or an inclusive range "lo:step:hi".
 *
 * Range points are rounded to 12 decimals so 0:0.1:1 yields exactly 0.6
 * rather than 0.6000000000000001.
 */
inline std::vector<double> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw UsageError("grid is empty");
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number(item));
    if (parts.size() != 3) throw UsageError("range grid must be lo:step:hi");
    const double lo = parts[0], step = parts[1], hi = parts[2];
    if (!(step > 0.0) || hi < lo) throw UsageError("range grid needs step > 0 and hi >= lo");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i)
      out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) throw UsageError("grid has an empty entry");
    out.push_back(parse_number(item));
  }
  return out;
}

/// Reads a flat key=value file into --key=value tokens. '#' starts a comment.
inline std::vector<std::string> config_file_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (value == "true") tokens.push_back("--" + key);
    else if (value != "false") tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

/**
 * Removes --config from args and splices the file's settings in right after the
 * subcommand name, ahead of the user's own flags, so explicit flags win.
 */
inline std::vector<std::string> expand_config(std::vector<std::string> args,
                                              const std::set<std::string>& subcommands) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const auto tokens = config_file_tokens(path);
  std::size_t at = args.size();
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (subcommands.count(args[i]) != 0) {
      at = i + 1;
      break;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
  return args;
}

}  // namespace oica::cli
