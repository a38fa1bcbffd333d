#pragma once

#include <stdexcept>
#include <string>

namespace mmsim {

// Base for every failure raised by the library. The CLI maps these to exit
// codes; tests match on the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MMSIM_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

MMSIM_DEFINE_ERROR(DimensionError)
MMSIM_DEFINE_ERROR(HermiticityError)
MMSIM_DEFINE_ERROR(NotPSDError)
MMSIM_DEFINE_ERROR(NotMultimeterChoiError)
MMSIM_DEFINE_ERROR(NormalizationError)
MMSIM_DEFINE_ERROR(StateError)
MMSIM_DEFINE_ERROR(DecompositionError)
MMSIM_DEFINE_ERROR(NotSuperchannelError)
MMSIM_DEFINE_ERROR(RealizationError)
MMSIM_DEFINE_ERROR(CapError)
MMSIM_DEFINE_ERROR(InternalError)
MMSIM_DEFINE_ERROR(InconsistencyError)

#undef MMSIM_DEFINE_ERROR

}  // namespace mmsim
