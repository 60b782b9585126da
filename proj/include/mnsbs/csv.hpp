// Strict CSV I/O for observation matrices.
//
// Format: header `x1,x2,...,xp`, one observation per row, `.` decimal,
// UTF-8, no missing values. The reader tolerates a BOM and CRLF endings
// and reports parse problems with 1-based row numbers.
#pragma once

#include <string>

#include "mnsbs/common.hpp"

namespace mnsbs {

ObservationMatrix read_observations_csv(const std::string& path);

void write_observations_csv(const std::string& path, const ObservationMatrix& obs);

}  // namespace mnsbs
