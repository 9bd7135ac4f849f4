#pragma once

#include <string>

#include "edmcal/observation.hpp"

namespace edmcal::io {

/// Square-matrix CSV: one row per line, NaN marks a missing entry.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

/// Observed-matrix CSV uses the same layout; NaN cells become unknown
/// entries of the mask.
observation::ObservedMatrix read_observed_csv(const std::string& path);
void write_observed_csv(const std::string& path,
                        const observation::ObservedMatrix& observed);

/// Positions CSV: one point per line, one column per coordinate.
Matrix read_positions_csv(const std::string& path);
void write_positions_csv(const std::string& path, const Matrix& positions);

std::string format_double(double value);

}  // namespace edmcal::io
