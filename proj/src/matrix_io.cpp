#include "lewisreg/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace lewisreg {

namespace {

void put_u64(std::ostream& out, std::uint64_t v)
{
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i)
        b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in)
{
    std::array<unsigned char, 8> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 8))
        throw FormatError("binary matrix: truncated header or data");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

double parse_double(std::string_view tok, std::size_t line)
{
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw FormatError("line " + std::to_string(line) + ": cannot parse '" + std::string(tok) + "'");
    return v;
}

std::vector<double> split_line(const std::string& text, std::size_t line)
{
    std::vector<double> out;
    std::size_t i = 0;
    const auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
    while (i < text.size()) {
        while (i < text.size() && is_sep(text[i]))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !is_sep(text[j]))
            ++j;
        if (j > i)
            out.push_back(parse_double(std::string_view(text).substr(i, j - i), line));
        i = j;
    }
    return out;
}

} // namespace

DenseMatrix parse_matrix_csv(std::istream& in)
{
    std::vector<double> data;
    Index cols = -1;
    Index rows = 0;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty() || text[0] == '#')
            continue;
        auto vals = split_line(text, line);
        if (vals.empty())
            continue;
        if (cols < 0)
            cols = Index(vals.size());
        else if (Index(vals.size()) != cols)
            throw FormatError("line " + std::to_string(line) + ": expected " + std::to_string(cols) +
                              " columns, found " + std::to_string(vals.size()));
        data.insert(data.end(), vals.begin(), vals.end());
        ++rows;
    }
    if (rows == 0)
        return DenseMatrix(0, 0);
    DenseMatrix A = Eigen::Map<DenseMatrix>(data.data(), rows, cols);
    require_finite(A, "matrix");
    return A;
}

DenseMatrix parse_matrix_binary(std::istream& in)
{
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kBinaryMagic, 8) != 0)
        throw FormatError("binary matrix: bad magic");
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (cols != 0 && rows > (std::uint64_t(1) << 36) / cols)
        throw FormatError("binary matrix: implausible size " + std::to_string(rows) + "x" + std::to_string(cols));
    DenseMatrix A{Index(rows), Index(cols)};
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            A(i, j) = std::bit_cast<double>(get_u64(in));
    require_finite(A, "matrix");
    return A;
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& A)
{
    out << std::setprecision(17);
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            if (j)
                out << ',';
            out << A(i, j);
        }
        out << '\n';
    }
}

void write_matrix_binary(std::ostream& out, const DenseMatrix& A)
{
    out.write(kBinaryMagic, 8);
    put_u64(out, std::uint64_t(A.rows()));
    put_u64(out, std::uint64_t(A.cols()));
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            put_u64(out, std::bit_cast<std::uint64_t>(A(i, j)));
}

DenseMatrix read_matrix(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path);
    char head[8] = {};
    in.read(head, 8);
    const bool binary = in.gcount() == 8 && std::memcmp(head, kBinaryMagic, 8) == 0;
    in.clear();
    in.seekg(0);
    return binary ? parse_matrix_binary(in) : parse_matrix_csv(in);
}

void write_matrix(const std::string& path, const DenseMatrix& A, bool binary)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path);
    if (binary)
        write_matrix_binary(out, A);
    else
        write_matrix_csv(out, A);
}

DenseVector read_vector(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open " + path);
    DenseMatrix M = parse_matrix_csv(in);
    if (M.cols() > 1)
        throw FormatError(path + ": expected one value per line");
    return M.rows() == 0 ? DenseVector() : DenseVector(M.col(0));
}

void write_vector(const std::string& path, const DenseVector& v)
{
    std::ofstream out(path);
    if (!out)
        throw FormatError("cannot write " + path);
    out << std::setprecision(17);
    for (Index i = 0; i < v.size(); ++i)
        out << v(i) << '\n';
}

} // namespace lewisreg
