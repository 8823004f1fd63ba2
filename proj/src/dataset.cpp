#include "rsub/dataset.hpp"

#include <cmath>
#include <sstream>

namespace rsub {

std::vector<std::string> validate_dataset(const Dataset& d) {
  std::vector<std::string> out;
  const Index n = d.x.rows();
  const Index p = d.x.cols();
  if (n < 1) out.push_back("x must have at least one row");
  if (p < 1) out.push_back("x must have at least one column");
  if (d.y && d.y->size() != n) {
    std::ostringstream os;
    os << "y length mismatch: " << d.y->size() << " entries for n=" << n;
    out.push_back(os.str());
  }
  if (d.truth && d.truth->size() != p) {
    std::ostringstream os;
    os << "truth length mismatch: " << d.truth->size() << " entries for p=" << p;
    out.push_back(os.str());
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (!std::isfinite(d.x(i, j))) {
        std::ostringstream os;
        os << "non-finite entry at x(" << i << "," << j << ")";
        out.push_back(os.str());
        i = n;  // report the first offender only; a corrupt file repeats a lot
        break;
      }
    }
  }
  if (d.y) {
    for (Index i = 0; i < d.y->size(); ++i) {
      if (!std::isfinite((*d.y)(i))) {
        std::ostringstream os;
        os << "non-finite entry at y(" << i << ")";
        out.push_back(os.str());
        break;
      }
    }
  }
  Index prev = -1;
  for (Index idx : d.meta.corrupted_rows) {
    if (idx < 0 || idx >= n) {
      out.push_back("corrupted row index out of range");
      break;
    }
    if (idx <= prev) {
      out.push_back("corrupted row indices must be strictly ascending");
      break;
    }
    prev = idx;
  }
  return out;
}

Matrix gather_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Index i = rows[j];
    if (i < 0 || i >= x.rows())
      throw std::invalid_argument("gather_rows: index out of range");
    out.row(static_cast<Index>(j)) = x.row(i);
  }
  return out;
}

Vector gather_entries(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Index i = rows[j];
    if (i < 0 || i >= v.size())
      throw std::invalid_argument("gather_entries: index out of range");
    out(static_cast<Index>(j)) = v(i);
  }
  return out;
}

}  // namespace rsub
