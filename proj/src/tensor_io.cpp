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

#include "lmbsim/tensor_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace lmbsim {

std::string_view to_string(TensorFormat f) { return f == TensorFormat::Text ? "text" : "binary"; }

TensorFormat tensor_format_from_string(std::string_view s) {
    if (s == "text" || s == "tns") return TensorFormat::Text;
    if (s == "binary" || s == "bin") return TensorFormat::Binary;
    throw ConfigError("unknown tensor format '" + std::string(s) + "'");
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    const auto bits = static_cast<std::uint64_t>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return static_cast<T>(v);
}

std::string data_error_at(const std::filesystem::path& path, const char* what, std::uint64_t index,
                          const std::string& detail) {
    std::ostringstream os;
    os << path.string() << ": " << what << " " << index << ": " << detail;
    return os.str();
}

CooTensor load_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::optional<Dims> dims;
    std::vector<CooElement> elements;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        if (line.front() == '#') {
            std::string hash, word;
            ls >> hash >> word;
            if (word == "dims") {
                Dims d{};
                if (!(ls >> d[0] >> d[1] >> d[2])) {
                    throw DataError(data_error_at(path, "line", lineno, "malformed dims header"));
                }
                dims = d;
            }
            continue;
        }
        if (!dims) throw DataError(data_error_at(path, "line", lineno, "element before '# dims' header"));
        std::uint64_t i = 0, j = 0, k = 0;
        double v = 0.0;
        std::string trailing;
        if (!(ls >> i >> j >> k >> v) || (ls >> trailing)) {
            throw DataError(data_error_at(path, "line", lineno, "expected 'i j k value'"));
        }
        if (i == 0 || j == 0 || k == 0 || i > (*dims)[0] || j > (*dims)[1] || k > (*dims)[2]) {
            throw DataError(data_error_at(path, "line", lineno, "coordinate out of range (1-based)"));
        }
        elements.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1),
                            static_cast<std::uint32_t>(k - 1), static_cast<float>(v)});
    }
    if (!dims) throw DataError(path.string() + ": missing '# dims I J K' header");
    return CooTensor(*dims, std::move(elements));
}

CooTensor load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::array<unsigned char, kBinaryHeaderBytes> header{};
    if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
        throw DataError(path.string() + ": truncated header");
    }
    if (get_le<std::uint32_t>(header.data()) != kBinaryMagic) throw DataError(path.string() + ": bad magic");
    if (get_le<std::uint32_t>(header.data() + 4) != kBinaryVersion) {
        throw DataError(path.string() + ": unsupported version");
    }
    const Dims dims{get_le<std::uint32_t>(header.data() + 8), get_le<std::uint32_t>(header.data() + 12),
                    get_le<std::uint32_t>(header.data() + 16)};
    const auto nnz = get_le<std::uint64_t>(header.data() + 24);

    std::vector<CooElement> elements;
    elements.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(nnz, 1u << 24)));
    std::array<unsigned char, kElementBytes> rec{};
    for (std::uint64_t z = 0; z < nnz; ++z) {
        if (!in.read(reinterpret_cast<char*>(rec.data()), rec.size())) {
            throw DataError(data_error_at(path, "record", z, "truncated record"));
        }
        CooElement e{get_le<std::uint32_t>(rec.data()), get_le<std::uint32_t>(rec.data() + 4),
                     get_le<std::uint32_t>(rec.data() + 8),
                     std::bit_cast<float>(get_le<std::uint32_t>(rec.data() + 12))};
        if (e.i >= dims[0] || e.j >= dims[1] || e.k >= dims[2]) {
            throw DataError(data_error_at(path, "record", z, "coordinate out of range"));
        }
        elements.push_back(e);
    }
    return CooTensor(dims, std::move(elements));
}

}  // namespace

TensorFormat detect_tensor_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open tensor file " + path.string());
    std::array<unsigned char, 4> head{};
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    if (in.gcount() == 4) {
        const std::uint32_t magic = head[0] | (head[1] << 8) | (head[2] << 16) | (std::uint32_t{head[3]} << 24);
        if (magic == kBinaryMagic) return TensorFormat::Binary;
    }
    return TensorFormat::Text;
}

CooTensor load_tensor(const std::filesystem::path& path, TensorFormat format) {
    CooTensor t = format == TensorFormat::Text ? load_text(path) : load_binary(path);
    t.check_unique();
    return t;
}

void store_tensor(const CooTensor& tensor, const std::filesystem::path& path, TensorFormat format) {
    if (format == TensorFormat::Text) {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write " + path.string());
        const auto& d = tensor.dims();
        out << "# dims " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
        // max_digits10 keeps the f32 round trip exact.
        out.precision(std::numeric_limits<float>::max_digits10);
        for (const auto& e : tensor.elements()) {
            out << e.i + 1 << ' ' << e.j + 1 << ' ' << e.k + 1 << ' ' << e.val << '\n';
        }
        if (!out) throw DataError("write failed for " + path.string());
        return;
    }

    const auto& d = tensor.dims();
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint32_t>::max();
    if (d[0] > kMax || d[1] > kMax || d[2] > kMax) {
        throw ConfigError("binary format stores extents as u32; tensor is too large");
    }
    std::string buf;
    buf.reserve(kBinaryHeaderBytes + kElementBytes * tensor.nnz());
    put_le<std::uint32_t>(buf, kBinaryMagic);
    put_le<std::uint32_t>(buf, kBinaryVersion);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d[0]));
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d[1]));
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d[2]));
    put_le<std::uint32_t>(buf, 0);
    put_le<std::uint64_t>(buf, tensor.nnz());
    for (const auto& e : tensor.elements()) {
        put_le<std::uint32_t>(buf, e.i);
        put_le<std::uint32_t>(buf, e.j);
        put_le<std::uint32_t>(buf, e.k);
        put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(e.val));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace lmbsim
