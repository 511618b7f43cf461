#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semistart {

struct CsvTable
{
  std::vector<std::string> header;         //!< empty when the input had none
  std::vector<std::vector<double>> rows;   //!< all rows have the same width

  std::size_t width() const { return rows.empty() ? header.size() : rows.front().size(); }
  std::vector<double> column(std::size_t j) const;
};

//! Comma-separated numbers with '.' decimals. Blank lines are skipped. The
//! first line is taken as a header when `header` is set or when it does not
//! parse as numbers. Ragged rows or unparsable fields throw invalid_argument.
CsvTable
read_csv(std::istream& in, bool header = false);

CsvTable
read_csv_file(const std::string& path, bool header = false);

//! General-format number with `precision` significant digits.
std::string
format_number(double v, int precision);

void
write_csv(std::ostream& out,
          const std::vector<std::string>& header,
          const std::vector<std::vector<double>>& rows,
          int precision,
          bool with_header);

} // namespace semistart
