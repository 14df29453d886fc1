#pragma once

#include <stdexcept>
#include <string>

namespace sck {

/// Invalid generator or circuit configuration (zero seed, non-maximal taps, ...).
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Structurally inconsistent inputs (mismatched stream lengths, ragged data).
class structural_error : public std::invalid_argument {
public:
    explicit structural_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A documented precondition was violated (e.g. non-canonical stream where
/// a canonical one is required).
class precondition_error : public std::logic_error {
public:
    explicit precondition_error(const std::string& what) : std::logic_error(what) {}
};

/// Degenerate problem input (zero matrix row, empty signal).
class degenerate_error : public std::invalid_argument {
public:
    explicit degenerate_error(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace sck
