#pragma once

#include <stdexcept>
#include <string>

namespace presage {

// Engine error codes. The names are part of the CLI/service contract:
// the CLI prints Error::name() on stderr and the service returns it as
// the machine-readable error code.
enum class Errc {
    invalid_argument,
    invalid_config,
    unsorted_input,
    out_of_order_append,
    parse_error,
    io_error,
    insufficient_history,
    no_data,
    no_surviving_mass,
    quantile_unattainable,
    model_degenerate,
    overlapping_scopes,
    not_found,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_argument:      return "InvalidArgument";
        case Errc::invalid_config:        return "InvalidConfig";
        case Errc::unsorted_input:        return "UnsortedInput";
        case Errc::out_of_order_append:   return "OutOfOrderAppend";
        case Errc::parse_error:           return "ParseError";
        case Errc::io_error:              return "IoError";
        case Errc::insufficient_history:  return "InsufficientHistory";
        case Errc::no_data:               return "NoData";
        case Errc::no_surviving_mass:     return "NoSurvivingMass";
        case Errc::quantile_unattainable: return "QuantileUnattainable";
        case Errc::model_degenerate:      return "ModelDegenerate";
        case Errc::overlapping_scopes:    return "OverlappingScopes";
        case Errc::not_found:             return "NotFound";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const { return code_; }
    const char* name() const { return errc_name(code_); }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool ok, Errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace presage
