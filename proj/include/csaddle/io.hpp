#pragma once

#include <string>

#include "csaddle/field.hpp"

namespace csaddle {

/// Write a field in the plain-text format
///   # field dim=<1|2> n=<n[,ny]> extent=<L[,Ly]> bc=<neumann|periodic>
/// followed by one value per line, row-major, 17 significant digits.
void save_field(const Field& f, const std::string& path);

Field load_field(const std::string& path);

}  // namespace csaddle
