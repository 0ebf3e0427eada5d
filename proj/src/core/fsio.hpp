#ifndef EQHMM_CORE_FSIO_HPP
#define EQHMM_CORE_FSIO_HPP

#include <string>

namespace eqhmm {

std::string read_file(const std::string& path);

/// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace eqhmm

#endif
