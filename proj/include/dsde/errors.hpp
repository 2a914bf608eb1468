#pragma once

#include <stdexcept>
#include <string>

namespace dsde {

// Exit-code families used by the CLI: 1 config, 2 numeric, 3 divergence,
// 4 insufficient history.
enum class ErrorClass { Config = 1, Numeric = 2, Divergence = 3, History = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

#define DSDE_DEFINE_ERROR(NAME, CLASS)                                         \
    class NAME : public Error {                                                \
    public:                                                                    \
        explicit NAME(const std::string& what) : Error(ErrorClass::CLASS, what) {} \
    }

DSDE_DEFINE_ERROR(NonCommensurate, Config);
DSDE_DEFINE_ERROR(InsufficientHistory, History);
DSDE_DEFINE_ERROR(NotDivisible, Config);
DSDE_DEFINE_ERROR(NumericalBlowup, Numeric);
DSDE_DEFINE_ERROR(GapTooLarge, Config);
DSDE_DEFINE_ERROR(DimensionMismatch, Config);
DSDE_DEFINE_ERROR(Divergence, Divergence);
DSDE_DEFINE_ERROR(PathTooShort, Config);
DSDE_DEFINE_ERROR(GuardUnsatisfiable, Numeric);
DSDE_DEFINE_ERROR(SingularDesign, Numeric);
DSDE_DEFINE_ERROR(LengthMismatch, Config);
DSDE_DEFINE_ERROR(SingleClass, Config);
DSDE_DEFINE_ERROR(MissingColumns, Config);
DSDE_DEFINE_ERROR(NonUniformSampling, Config);
DSDE_DEFINE_ERROR(QuadratureFailure, Numeric);
DSDE_DEFINE_ERROR(ConfigError, Config);

#undef DSDE_DEFINE_ERROR

}  // namespace dsde
