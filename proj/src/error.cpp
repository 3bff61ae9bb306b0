#include "crowdsoft/error.hpp"

namespace crowdsoft {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateAnnotation: return "DuplicateAnnotation";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyItem: return "EmptyItem";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::InvalidVocabulary: return "InvalidVocabulary";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BoundaryParam: return "BoundaryParam";
    case ErrorCode::EnsembleMismatch: return "EnsembleMismatch";
    case ErrorCode::NeedsEnsemble: return "NeedsEnsemble";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace crowdsoft
