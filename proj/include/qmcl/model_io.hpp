#ifndef QMCL_MODEL_IO_HPP
#define QMCL_MODEL_IO_HPP

#include <map>
#include <string>

#include "qmcl/closure.hpp"

namespace qmcl {

// Persisted model container: a directory holding a flat key-value manifest
// plus one raw blob per array (little-endian float64, row-major). The
// manifest records array names, shapes, element type and byte order, a
// format version, the training configuration echo, and the dataset
// fingerprint; loading verifies that manifest shapes match blob sizes
// exactly.
void save_model(const ClosureModel& model, const std::string& dir,
                const std::map<std::string, std::string>& extra_manifest = {});

ClosureModel load_model(const std::string& dir);

// FNV-1a hash of a file's bytes, hex encoded; used as the dataset
// fingerprint.
std::string file_fingerprint(const std::string& path);

}  // namespace qmcl

#endif
