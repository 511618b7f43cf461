#include "semistart/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace semistart {

namespace {

std::string
trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string>
split(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

bool
parse_double(const std::string& s, double& v)
{
  if (s.empty()) {
    return false;
  }
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') {
    ++first;
  }
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last;
}

} // namespace

std::vector<double>
CsvTable::column(std::size_t j) const
{
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (j >= r.size()) {
      throw std::invalid_argument("CSV column " + std::to_string(j) + " out of range");
    }
    out.push_back(r[j]);
  }
  return out;
}

CsvTable
read_csv(std::istream& in, bool header)
{
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (first && (header || !numeric)) {
      t.header = fields;
      first = false;
      continue;
    }
    first = false;
    if (!numeric) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": cannot parse '" + trim(line) + "'");
    }
    if (!t.rows.empty() && row.size() != t.rows.front().size()) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                  ": expected " +
                                  std::to_string(t.rows.front().size()) +
                                  " fields");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable
read_csv_file(const std::string& path, bool header)
{
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open '" + path + "'");
  }
  return read_csv(in, header);
}

std::string
format_number(double v, int precision)
{
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

void
write_csv(std::ostream& out,
          const std::vector<std::string>& header,
          const std::vector<std::vector<double>>& rows,
          int precision,
          bool with_header)
{
  if (with_header && !header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      out << (j ? "," : "") << header[j];
    }
    out << '\n';
  }
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      out << (j ? "," : "") << format_number(r[j], precision);
    }
    out << '\n';
  }
}

} // namespace semistart
