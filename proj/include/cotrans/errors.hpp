#pragma once

#include <stdexcept>
#include <string>

namespace cotrans {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define COTRANS_ERROR(Name)                                                    \
  struct Name : Error {                                                        \
    using Error::Error;                                                        \
  }

COTRANS_ERROR(SingularMrp);
COTRANS_ERROR(DimensionMismatch);
COTRANS_ERROR(ZeroThrust);
COTRANS_ERROR(IndexOutOfRange);
COTRANS_ERROR(CholeskyFailure);
COTRANS_ERROR(InvalidCommand);
COTRANS_ERROR(SingularAssembly);
COTRANS_ERROR(UnstableOperatingPoint);
COTRANS_ERROR(FitInfeasible);
COTRANS_ERROR(ChannelMismatch);
COTRANS_ERROR(UnstableSystem);
COTRANS_ERROR(ConfigError);
COTRANS_ERROR(LogFormatError);

#undef COTRANS_ERROR

} // namespace cotrans
