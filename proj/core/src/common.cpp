#include <string>

#include "cpd/error.hpp"
#include "cpd/types.hpp"

namespace cpd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::non_conforming_domain: return "NonConformingDomain";
    case ErrorCode::empty_cloud: return "EmptyCloud";
    case ErrorCode::isolated_point: return "IsolatedPoint";
    case ErrorCode::degenerate_neighborhood: return "DegenerateNeighborhood";
    case ErrorCode::degenerate_reference: return "DegenerateReference";
    case ErrorCode::collapsed_bond: return "CollapsedBond";
    case ErrorCode::collapsed_area: return "CollapsedArea";
    case ErrorCode::collapsed_volume: return "CollapsedVolume";
    case ErrorCode::layer_overlap: return "LayerOverlap";
    case ErrorCode::singular_tangent: return "SingularTangent";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::step_degeneracy: return "StepDegeneracy";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(AssemblyMode mode) {
  return mode == AssemblyMode::collocation ? "collocation" : "variational";
}

AssemblyMode parse_assembly_mode(std::string_view text) {
  if (text == "collocation") return AssemblyMode::collocation;
  if (text == "variational") return AssemblyMode::variational;
  throw Error(ErrorCode::invalid_argument, "unknown assembly mode '" + std::string(text) + "'");
}

}  // namespace cpd
