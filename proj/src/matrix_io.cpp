#include "fasta/matrix_io.hpp"

#include "fasta/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace fasta {

std::string read_file_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw std::runtime_error("read error on '" + path.string() + "'");
    return std::move(buf).str();
}

void write_file_bytes(const std::filesystem::path &path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
        throw std::runtime_error("write error on '" + path.string() + "'");
}

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

namespace {

double parse_number(std::string_view tok, const std::string &source, std::size_t line) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t'))
        tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
        tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size())
        throw ParseError(source + ":" + std::to_string(line) + ": invalid number '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split_lines(std::string_view bytes) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= bytes.size()) {
        auto nl = bytes.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < bytes.size())
                lines.push_back(bytes.substr(start));
            break;
        }
        lines.push_back(bytes.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool blank(std::string_view line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c)))
            return false;
    return true;
}

Matrix parse_csv(std::string_view bytes, const std::string &source) {
    std::vector<std::vector<double>> rows;
    auto lines = split_lines(bytes);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln]))
            continue;
        std::vector<double> row;
        std::string_view rest = lines[ln];
        while (true) {
            auto comma = rest.find(',');
            row.push_back(parse_number(rest.substr(0, comma), source, ln + 1));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(source + ":" + std::to_string(ln + 1) + ": expected " +
                             std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError(source + ": empty matrix file");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Matrix parse_mm(std::string_view bytes, const std::string &source) {
    auto lines = split_lines(bytes);
    auto banner = split_ws(lines.front());
    if (banner.size() < 5)
        throw ParseError(source + ":1: malformed Matrix Market banner");
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto &c : out)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    const std::string layout = lower(banner[2]);
    const std::string field = lower(banner[3]);
    const std::string symmetry = lower(banner[4]);
    if (lower(banner[1]) != "matrix" || (layout != "coordinate" && layout != "array"))
        throw ParseError(source + ":1: unsupported Matrix Market object/format");
    if (field != "real" && field != "integer" && field != "double")
        throw ParseError(source + ":1: unsupported Matrix Market field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw ParseError(source + ":1: unsupported Matrix Market symmetry '" + symmetry + "'");

    std::size_t ln = 1;
    while (ln < lines.size() && (blank(lines[ln]) || lines[ln].front() == '%'))
        ++ln;
    if (ln == lines.size())
        throw ParseError(source + ": missing Matrix Market size line");
    auto size_tok = split_ws(lines[ln]);
    const std::size_t size_line = ln + 1;
    auto to_index = [&](std::string_view tok, std::size_t line) {
        double v = parse_number(tok, source, line);
        if (v < 0 || v != std::floor(v))
            throw ParseError(source + ":" + std::to_string(line) + ": invalid index '" + std::string(tok) + "'");
        return static_cast<Eigen::Index>(v);
    };
    if (size_tok.size() != (layout == "coordinate" ? 3u : 2u))
        throw ParseError(source + ":" + std::to_string(size_line) + ": malformed size line");
    const Eigen::Index rows = to_index(size_tok[0], size_line);
    const Eigen::Index cols = to_index(size_tok[1], size_line);
    if (rows == 0 || cols == 0)
        throw ParseError(source + ": empty matrix");
    Matrix m = Matrix::Zero(rows, cols);
    ++ln;

    std::vector<std::pair<std::size_t, std::string_view>> tokens;
    for (; ln < lines.size(); ++ln) {
        if (blank(lines[ln]) || lines[ln].front() == '%')
            continue;
        for (auto tok : split_ws(lines[ln]))
            tokens.emplace_back(ln + 1, tok);
    }

    if (layout == "coordinate") {
        const Eigen::Index nnz = to_index(size_tok[2], size_line);
        if (tokens.size() != static_cast<std::size_t>(3 * nnz))
            throw ParseError(source + ": expected " + std::to_string(nnz) + " entries");
        for (std::size_t k = 0; k < tokens.size(); k += 3) {
            const auto line = tokens[k].first;
            const Eigen::Index i = to_index(tokens[k].second, line) - 1;
            const Eigen::Index j = to_index(tokens[k + 1].second, line) - 1;
            if (i < 0 || j < 0 || i >= rows || j >= cols)
                throw ParseError(source + ":" + std::to_string(line) + ": entry out of bounds");
            const double v = parse_number(tokens[k + 2].second, source, line);
            m(i, j) = v;
            if (symmetric)
                m(j, i) = v;
        }
    } else {
        // Column-major; symmetric arrays list only the lower triangle.
        std::size_t k = 0;
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = symmetric ? j : 0; i < rows; ++i) {
                if (k == tokens.size())
                    throw ParseError(source + ": too few array entries");
                const double v = parse_number(tokens[k].second, source, tokens[k].first);
                ++k;
                m(i, j) = v;
                if (symmetric)
                    m(j, i) = v;
            }
        if (k != tokens.size())
            throw ParseError(source + ": too many array entries");
    }
    return m;
}

} // namespace

Matrix parse_matrix(std::string_view bytes, const std::string &source) {
    if (bytes.rfind("%%MatrixMarket", 0) == 0)
        return parse_mm(bytes, source);
    return parse_csv(bytes, source);
}

Vector parse_vector(std::string_view bytes, const std::string &source) {
    Matrix m = parse_matrix(bytes, source);
    if (m.cols() == 1)
        return m.col(0);
    if (m.rows() == 1)
        return m.row(0).transpose();
    throw ParseError(source + ": expected a vector, got a " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " matrix");
}

std::string format_csv(const Eigen::Ref<const Matrix> &m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_matrix_market(const Eigen::Ref<const Matrix> &m) {
    std::string out = "%%MatrixMarket matrix array real general\n";
    out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out += format_double(m(i, j)) + "\n";
    return out;
}

} // namespace fasta
