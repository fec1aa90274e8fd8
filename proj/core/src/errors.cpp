#include "sw/errors.hpp"

#include <sstream>

namespace sw {
namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

DegenerateSpectrum::DegenerateSpectrum(const std::string& what, double gap, double threshold)
    : Error(what + " (eigenvalue gap " + sci(gap) + " below " + sci(threshold) + ")"),
      gap_(gap),
      threshold_(threshold) {}

FormatError::FormatError(const std::string& what, std::size_t offset)
    : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

}  // namespace sw
