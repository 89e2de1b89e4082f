#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "tensalg/planner.hpp"

namespace tensalg {

/// Product description for the contraction planner:
///
///   extent X 2              (or one header line: extents: X=2, Y=3)
///   A : z^1,t^,z_
///
/// Spaces are registered in declaration order.
struct ExpressionFile {
  RegistryPtr registry;
  std::vector<FactorSignature> factors;
};

ExpressionFile parse_expression(std::istream& in, const std::string& source);
ExpressionFile load_expression(const std::filesystem::path& path);

}  // namespace tensalg
