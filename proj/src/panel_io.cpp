#include "dyncausal/panel_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dyncausal {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("rename failed for " + path + ": " +
                             std::strerror(errno));
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail_at(const std::string& path, int line_no,
                          const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

long parse_index(const std::string& s, const std::string& path, int line_no,
                 const char* what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail_at(path, line_no, std::string("non-integer ") + what + ": '" + s + "'");
  }
}

double parse_value(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail_at(path, line_no, "non-numeric cell: '" + s + "'");
  }
}

}  // namespace

PanelTensor ingest_panel_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open panel file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file (header required)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "unit") {
    throw std::runtime_error(path +
                             ":1: malformed header, expected 't,unit,<vars...>'");
  }
  const int p = static_cast<int>(header.size()) - 2;

  struct Row {
    long t, unit;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  long t_max = 0, unit_max = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != p + 2) {
      fail_at(path, line_no,
              "ragged row: expected " + std::to_string(p + 2) + " fields, got " +
                  std::to_string(fields.size()));
    }
    Row row;
    row.t = parse_index(fields[0], path, line_no, "time stamp");
    row.unit = parse_index(fields[1], path, line_no, "unit");
    if (row.t < 1) fail_at(path, line_no, "time stamps must start at 1");
    if (row.unit < 1) fail_at(path, line_no, "units must start at 1");
    row.values.reserve(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
      row.values.push_back(parse_value(fields[static_cast<std::size_t>(j + 2)],
                                       path, line_no));
    }
    t_max = std::max(t_max, row.t);
    unit_max = std::max(unit_max, row.unit);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const long T = t_max;
  const long m = unit_max;
  PanelTensor panel = make_panel(static_cast<int>(T), static_cast<int>(m), p);
  panel.variable_names.assign(header.begin() + 2, header.end());
  std::vector<char> seen(static_cast<std::size_t>(T * m), 0);
  for (const auto& row : rows) {
    const std::size_t cell =
        static_cast<std::size_t>((row.t - 1) * m + (row.unit - 1));
    if (seen[cell]) {
      throw std::runtime_error(path + ": duplicate cell (t=" +
                               std::to_string(row.t) + ", unit=" +
                               std::to_string(row.unit) + ")");
    }
    seen[cell] = 1;
    for (int j = 0; j < p; ++j) {
      panel.x[static_cast<std::size_t>(row.t - 1)](row.unit - 1, j) =
          row.values[static_cast<std::size_t>(j)];
    }
  }
  for (long t = 1; t <= T; ++t) {
    for (long u = 1; u <= m; ++u) {
      if (!seen[static_cast<std::size_t>((t - 1) * m + (u - 1))]) {
        throw std::runtime_error(path + ": missing cell (t=" + std::to_string(t) +
                                 ", unit=" + std::to_string(u) +
                                 "); stamps and units must be contiguous");
      }
    }
  }
  panel.validate();
  return panel;
}

void emit_panel_csv(const std::string& path, const PanelTensor& panel) {
  panel.validate();
  std::string out = "t,unit";
  for (int j = 0; j < panel.p(); ++j) {
    out += ',';
    out += panel.variable_names.empty() ? ("v" + std::to_string(j + 1))
                                        : panel.variable_names[static_cast<std::size_t>(j)];
  }
  out += '\n';
  for (int t = 1; t <= panel.T(); ++t) {
    const auto& slice = panel.x[static_cast<std::size_t>(t - 1)];
    for (int u = 1; u <= panel.m(); ++u) {
      out += std::to_string(t);
      out += ',';
      out += std::to_string(u);
      for (int j = 0; j < panel.p(); ++j) {
        out += ',';
        out += format_double(slice(u - 1, j));
      }
      out += '\n';
    }
  }
  atomic_write(path, out);
}

}  // namespace dyncausal
