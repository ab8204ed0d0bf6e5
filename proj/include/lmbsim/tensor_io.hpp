/*
 * Copyright 2026 The lmbsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "lmbsim/tensor.hpp"

namespace lmbsim {

/// On-disk tensor encodings.
///
/// Text: a `# dims I J K` header line, then one `i j k value` line per
/// nonzero with 1-based coordinates. Blank lines and other `#` lines are
/// ignored.
///
/// Binary (all fields little-endian):
///
///   offset  size  field
///   0       4     magic "LMBT"
///   4       4     version (1)
///   8       4     I
///   12      4     J
///   16      4     K
///   20      4     reserved (0)
///   24      8     nnz
///   32      16*n  records: u32 i, u32 j, u32 k, f32 value (0-based)
enum class TensorFormat { Text, Binary };

inline constexpr std::uint32_t kBinaryMagic = 0x544d424c;  // "LMBT"
inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderBytes = 32;

std::string_view to_string(TensorFormat f);
TensorFormat tensor_format_from_string(std::string_view s);

/// Reads and validates (bounds, duplicates) a tensor file.
CooTensor load_tensor(const std::filesystem::path& path, TensorFormat format);
/// Binary when the file starts with the magic, text otherwise.
TensorFormat detect_tensor_format(const std::filesystem::path& path);
void store_tensor(const CooTensor& tensor, const std::filesystem::path& path, TensorFormat format);

}  // namespace lmbsim
