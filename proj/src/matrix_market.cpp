#include "aschwarz/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aschwarz {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty input");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" ||
        lower(format) != "coordinate" || lower(field) != "real" ||
        lower(symmetry) != "general")
        throw std::runtime_error("matrix market: unsupported header: " + line);

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    std::size_t nrows = 0, ncols = 0, nnz = 0;
    if (!(dims >> nrows >> ncols >> nnz))
        throw std::runtime_error("matrix market: malformed size line");

    SparseBuilder b(nrows, ncols);
    for (std::size_t k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entries");
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > nrows ||
            static_cast<std::size_t>(j) > ncols)
            throw std::runtime_error("matrix market: entry index out of range");
        b.add(static_cast<std::size_t>(i - 1), static_cast<int>(j - 1), v);
    }
    return b.finalize();
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("matrix market: cannot open " + path);
    return read_matrix_market(f);
}

void write_matrix_market(const SparseMatrix& A, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.nrows << ' ' << A.ncols << ' ' << A.nnz() << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < A.nrows; ++i)
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            out << (i + 1) << ' ' << (A.col[k] + 1) << ' ' << A.val[k] << '\n';
}

void write_matrix_market_file(const SparseMatrix& A, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("matrix market: cannot open " + path);
    write_matrix_market(A, f);
    if (!f) throw std::runtime_error("matrix market: write failed for " + path);
}

}  // namespace aschwarz
