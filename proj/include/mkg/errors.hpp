#pragma once

#include <stdexcept>
#include <string>

namespace mkg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define MKG_DEFINE_ERROR(Name)                     \
  struct Name : Error {                            \
    explicit Name(const std::string& msg)          \
        : Error(std::string(#Name) + ": " + msg) {} \
  }

MKG_DEFINE_ERROR(BracketingFailure);
MKG_DEFINE_ERROR(NonConvergence);
MKG_DEFINE_ERROR(ParameterOutOfRange);
MKG_DEFINE_ERROR(ProfileMismatch);
MKG_DEFINE_ERROR(ConvergenceFailure);
MKG_DEFINE_ERROR(GridMismatch);
MKG_DEFINE_ERROR(BoxTooSmall);
MKG_DEFINE_ERROR(ConstraintSolveFailure);
MKG_DEFINE_ERROR(NumericBlowup);
MKG_DEFINE_ERROR(FitDiverged);
MKG_DEFINE_ERROR(OutsideStabilityWindow);
MKG_DEFINE_ERROR(InsufficientSamples);
MKG_DEFINE_ERROR(UnwrapAmbiguity);
MKG_DEFINE_ERROR(RegionLeftBox);
MKG_DEFINE_ERROR(ConfigInvalid);

#undef MKG_DEFINE_ERROR

}  // namespace mkg
