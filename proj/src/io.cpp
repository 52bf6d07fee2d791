#include "demix/io.hpp"
#include "demix/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace demix {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> lines_of(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty())
      out.push_back(line);
  }
  return out;
}

std::int64_t parse_int(const std::string& s, const std::string& where)
{
  const std::string t = trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw ValidationError(where + ": expected an integer, got '" + t + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& where)
{
  const std::string t = trim(s);
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size())
      throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": expected a number, got '" + t + "'");
  }
}

std::pair<std::string, std::string> split_pair(const std::string& line, int lineno)
{
  const auto c = line.find(',');
  if (c == std::string::npos || line.find(',', c + 1) != std::string::npos)
    throw ValidationError("line " + std::to_string(lineno) + ": expected two comma-separated fields");
  return { line.substr(0, c), line.substr(c + 1) };
}

//! Pairs (k, count) from either layout.
std::vector<std::pair<std::int64_t, std::int64_t>> parse_pairs(const std::string& text)
{
  auto lines = lines_of(text);
  if (lines.empty())
    throw ValidationError("histogram: empty input");
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  const bool csv = lines.front().find(',') != std::string::npos;
  std::size_t start = 0;
  if (csv) {
    auto [a, b] = split_pair(lines.front(), 1);
    if (trim(a) == "k" && trim(b) == "count")
      start = 1;
  }
  for (std::size_t i = start; i < lines.size(); ++i) {
    const std::string where = "line " + std::to_string(i + 1);
    if (csv) {
      auto [a, b] = split_pair(lines[i], static_cast<int>(i + 1));
      const auto c = parse_int(b, where);
      if (c < 0)
        throw ValidationError(where + ": negative count");
      out.emplace_back(parse_int(a, where), c);
    } else {
      out.emplace_back(parse_int(lines[i], where), 1);
    }
  }
  if (out.empty())
    throw ValidationError("histogram: no data rows");
  return out;
}

} // namespace

EmpiricalCounts parse_histogram_text(const std::string& text)
{
  EmpiricalCounts c;
  for (auto [k, n] : parse_pairs(text)) {
    if (k < 0)
      throw ValidationError("histogram: negative value " + std::to_string(k));
    c.add(k, static_cast<std::uint64_t>(n));
  }
  if (c.empty())
    throw ValidationError("histogram: total count is zero");
  return c;
}

EmpiricalCounts parse_histogram(const std::string& path)
{
  return parse_histogram_text(read_file(path));
}

IntegerCounts parse_integer_histogram_text(const std::string& text)
{
  IntegerCounts c;
  std::uint64_t n = 0;
  for (auto [k, m] : parse_pairs(text)) {
    if (m > 0)
      c[k] += static_cast<std::uint64_t>(m);
    n += static_cast<std::uint64_t>(m);
  }
  if (n == 0)
    throw ValidationError("histogram: total count is zero");
  return c;
}

IntegerCounts parse_integer_histogram(const std::string& path)
{
  return parse_integer_histogram_text(read_file(path));
}

NoisePmf parse_noise_text(const std::string& text)
{
  auto lines = lines_of(text);
  if (lines.empty())
    throw ValidationError("noise: empty input");
  std::map<std::int64_t, double> m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto [a, b] = split_pair(lines[i], static_cast<int>(i + 1));
    if (i == 0 && trim(a) == "k" && trim(b) == "prob")
      continue;
    const std::string where = "noise line " + std::to_string(i + 1);
    const auto k = parse_int(a, where);
    if (m.count(k))
      throw ValidationError(where + ": repeated k");
    m[k] = parse_real(b, where);
  }
  if (m.empty())
    throw ValidationError("noise: no rows");
  const std::int64_t lo = m.begin()->first, hi = m.rbegin()->first;
  std::vector<double> probs(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (auto [k, p] : m)
    probs[k - lo] = p;
  return make_noise_pmf(lo, std::move(probs));
}

NoisePmf parse_noise(const std::string& path)
{
  return parse_noise_text(read_file(path));
}

std::string histogram_csv(const EmpiricalCounts& counts)
{
  std::string s = "k,count\n";
  for (std::int64_t k = 0; k <= counts.max_value(); ++k)
    if (counts.count(k) > 0)
      s += std::to_string(k) + "," + std::to_string(counts.count(k)) + "\n";
  return s;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::set<std::string>& allowed)
{
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line = line.substr(0, h);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!allowed.count(key))
      throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (out.count(key))
      throw ValidationError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::string fmt_num(double v)
{
  if (std::isnan(v))
    return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError("cannot write '" + path + "'");
  out << contents;
  if (!out)
    throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace demix
