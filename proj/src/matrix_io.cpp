#include "filtop/matrix_io.hpp"

#include "filtop/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; add byte swaps before porting");
static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

namespace filtop {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'M', '1'};

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& matrix) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());

    out.write(kMagic, 4);
    const std::uint64_t rows = static_cast<std::uint64_t>(matrix.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(matrix.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);

    std::vector<double> row(static_cast<size_t>(matrix.cols()));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) row[static_cast<size_t>(c)] = matrix(r, c);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a DFM1 matrix file: " + path.string());

    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in) throw IoError("truncated header: " + path.string());
    if (rows > (1ULL << 32) || cols > (1ULL << 32))
        throw IoError("implausible matrix shape in " + path.string());

    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> row(static_cast<size_t>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in) throw IoError("truncated data: " + path.string());
        for (std::uint64_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[static_cast<size_t>(c)];
    }
    in.peek();
    if (!in.eof()) throw IoError("trailing bytes in " + path.string());
    return m;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

}  // namespace filtop
