#pragma once

#include <stdexcept>
#include <string>

namespace weylab {

/// Error families map onto CLI exit codes.
enum class ErrorFamily { config = 2, capacity = 3, numerical = 4, io = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), family_(family), kind_(std::move(kind)) {}

    ErrorFamily family() const noexcept { return family_; }
    const std::string& kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
    std::string kind_;
};

#define WEYLAB_DEFINE_ERROR(Name, Family)                                   \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what)                              \
            : Error(ErrorFamily::Family, #Name, what) {}                    \
    };

WEYLAB_DEFINE_ERROR(ConfigError, config)
WEYLAB_DEFINE_ERROR(CapacityError, capacity)
WEYLAB_DEFINE_ERROR(GridError, capacity)
WEYLAB_DEFINE_ERROR(TruncationError, capacity)
WEYLAB_DEFINE_ERROR(MarginExhausted, capacity)
WEYLAB_DEFINE_ERROR(AlignmentError, capacity)
WEYLAB_DEFINE_ERROR(GridMismatchError, capacity)
WEYLAB_DEFINE_ERROR(ResampleError, capacity)
WEYLAB_DEFINE_ERROR(WindowError, capacity)
WEYLAB_DEFINE_ERROR(ModeError, capacity)
WEYLAB_DEFINE_ERROR(DomainError, numerical)
WEYLAB_DEFINE_ERROR(ZeroNorm, numerical)
WEYLAB_DEFINE_ERROR(FDStepError, numerical)
WEYLAB_DEFINE_ERROR(ToleranceError, numerical)
WEYLAB_DEFINE_ERROR(IoError, io)

#undef WEYLAB_DEFINE_ERROR

}  // namespace weylab
