#include "eviz/error.hpp"

namespace eviz {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "IoError";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::UnknownUnit: return "UnknownUnit";
    case Errc::WindowLongerThanSeries: return "WindowLongerThanSeries";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::DegenerateScale: return "DegenerateScale";
    case Errc::EmbeddingTooLong: return "EmbeddingTooLong";
    case Errc::DegenerateThreshold: return "DegenerateThreshold";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::TooFewRecords: return "TooFewRecords";
    case Errc::MissingImage: return "MissingImage";
    case Errc::MissingAnswer: return "MissingAnswer";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::MissingGeneration: return "MissingGeneration";
    case Errc::StepOutOfRange: return "StepOutOfRange";
    case Errc::NonNormalizedDistribution: return "NonNormalizedDistribution";
  }
  return "Unknown";
}

}  // namespace eviz
