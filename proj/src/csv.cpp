#include "rsub/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace rsub {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    std::remove(tmp.c_str());
    throw std::runtime_error("rename to " + path + " failed: " + std::strerror(err));
  }
}

std::string dataset_to_csv(const Dataset& d) {
  const Index n = d.n();
  const Index p = d.p();
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(p + 1) * 12);
  for (Index j = 0; j < p; ++j) {
    if (j) out += ',';
    out += 'x';
    out += std::to_string(j + 1);
  }
  if (d.y) out += ",y";
  out += '\n';
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (j) out += ',';
      out += format_double(d.x(i, j));
    }
    if (d.y) {
      out += ',';
      out += format_double((*d.y)(i));
    }
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  write_file_atomic(path, dataset_to_csv(d));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_field(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{}) {
    std::ostringstream os;
    os << "CSV line " << line_no << ": cannot parse number '" << s << "'";
    throw std::invalid_argument(os.str());
  }
  return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("CSV is empty (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  bool has_y = false;
  Index p = static_cast<Index>(header.size());
  if (!header.empty() && header.back() == "y") {
    has_y = true;
    p -= 1;
  }
  if (p < 1) throw std::invalid_argument("CSV header has no feature columns");
  for (Index j = 0; j < p; ++j) {
    const std::string expect = "x" + std::to_string(j + 1);
    if (header[static_cast<std::size_t>(j)] != expect)
      throw std::invalid_argument("CSV header column " + std::to_string(j + 1) +
                                  " is '" + header[static_cast<std::size_t>(j)] +
                                  "', expected '" + expect + "'");
  }

  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::size_t expect = static_cast<std::size_t>(p) + (has_y ? 1 : 0);
    if (fields.size() != expect) {
      std::ostringstream os;
      os << "CSV line " << line_no << ": expected " << expect << " fields, got "
         << fields.size();
      throw std::invalid_argument(os.str());
    }
    for (Index j = 0; j < p; ++j)
      xs.push_back(parse_field(fields[static_cast<std::size_t>(j)], line_no));
    if (has_y) ys.push_back(parse_field(fields.back(), line_no));
  }
  const Index n = static_cast<Index>(xs.size() / static_cast<std::size_t>(p));
  if (n < 1) throw std::invalid_argument("CSV has no data rows");

  Dataset d;
  d.x.resize(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      d.x(i, j) = xs[static_cast<std::size_t>(i * p + j)];
  if (has_y) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = ys[static_cast<std::size_t>(i)];
    d.y = std::move(y);
  }
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

}  // namespace rsub
