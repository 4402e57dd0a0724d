#pragma once

// TTE1 tensor files: magic "TTE1", uint32 rows, uint32 cols (little-endian),
// then row-major float32 little-endian data. Used for extracted and generated
// encoder-state sequences and for feature dumps.

#include <iosfwd>
#include <string>

#include "ttekit/mat.hpp"

namespace ttekit {

void write_tensor(const std::string& path, const MatF& m);
MatF read_tensor(const std::string& path);

// Stream forms used by the checkpoint container.
void write_tensor_stream(std::ostream& os, const MatF& m);
MatF read_tensor_stream(std::istream& is, const std::string& what);

}  // namespace ttekit
