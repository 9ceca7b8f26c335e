#pragma once

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msdecon/errors.hpp"

namespace msdecon {

//! Read a data file: one decimal number per line (UTF-8, LF). Empty lines at
//! the end are tolerated; anything else is a parse error with line number.
inline std::vector<double> read_data_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw parse_error("cannot open data file: " + path);
  std::vector<double> data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw parse_error(path + ":" + std::to_string(lineno) + ": not a number: '" + line + "'");
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
      ++pos;
    if (pos != line.size())
      throw parse_error(path + ":" + std::to_string(lineno) + ": trailing characters: '" + line + "'");
    data.push_back(value);
  }
  if (data.empty())
    throw parse_error(path + ": empty data file");
  return data;
}

//! Atomic write: temp file in the same directory, then rename.
inline void write_atomic(const std::string& path, const std::string& content)
{
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw config_error("cannot open for writing: " + tmp);
    out << content;
    if (!out)
      throw config_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw config_error("rename failed: " + tmp + " -> " + path);
}

//! RFC-4180 field quoting: quote when the field contains comma, quote or
//! newline; double embedded quotes.
inline std::string csv_field(const std::string& s)
{
  bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += "\"\"";
    else
      out += c;
  }
  out += "\"";
  return out;
}

inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace msdecon
