#include "mulharm/csv_io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mulharm/error.hpp"

namespace mulharm::csv {
namespace {

struct Row {
    std::array<long, 2> index{0, 0};
    cplx value;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// Returns the dimension implied by the header and the parsed rows.
int parse(std::istream& in, const std::vector<std::string>& h1, const std::vector<std::string>& h2,
          std::vector<Row>& rows) {
    std::string line;
    if (!std::getline(in, line)) throw RejectedInput("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    int dim = 0;
    if (header == h1) dim = 1;
    else if (header == h2) dim = 2;
    else throw RejectedInput("csv: unexpected header '" + line + "'");

    const std::size_t cols = static_cast<std::size_t>(dim) + 2;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != cols) throw RejectedInput("csv: wrong column count on line " + std::to_string(lineno));
        Row r;
        try {
            for (int a = 0; a < dim; ++a) r.index[static_cast<std::size_t>(a)] = std::stol(cells[static_cast<std::size_t>(a)]);
            r.value = {std::stod(cells[cols - 2]), std::stod(cells[cols - 1])};
        } catch (const std::exception&) {
            throw RejectedInput("csv: unparsable number on line " + std::to_string(lineno));
        }
        rows.push_back(r);
    }
    return dim;
}

TorusGrid infer_grid(int dim, std::size_t count) {
    std::size_t n = count;
    if (dim == 2) {
        n = 0;
        while (n * n < count) ++n;
        if (n * n != count) throw RejectedInput("csv: row count is not a square grid");
    }
    return TorusGrid(dim, n);
}

std::vector<cplx> place(const TorusGrid& grid, const std::vector<Row>& rows, bool frequencies) {
    std::vector<cplx> values(grid.size());
    std::vector<bool> seen(grid.size(), false);
    const long n = static_cast<long>(grid.points_per_axis());
    for (const auto& r : rows) {
        for (int a = 0; a < grid.dimension(); ++a) {
            const long v = r.index[static_cast<std::size_t>(a)];
            const bool ok = frequencies ? (v >= -n / 2 && v < n / 2) : (v >= 0 && v < n);
            if (!ok) throw RejectedInput("csv: index " + std::to_string(v) + " outside the grid");
        }
        const std::size_t flat = frequencies
                                     ? grid.flat_of_frequency({r.index[0], r.index[1]})
                                     : grid.flatten({static_cast<std::size_t>(r.index[0]), static_cast<std::size_t>(r.index[1])});
        if (seen[flat]) throw RejectedInput("csv: duplicate row");
        seen[flat] = true;
        values[flat] = r.value;
    }
    return values;
}

}  // namespace

void write(std::ostream& out, const SampledFunction& f) {
    const auto& g = f.grid();
    out << (g.dimension() == 1 ? "i,re,im\n" : "i0,i1,re,im\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = g.unflatten(i);
        out << idx[0] << ',';
        if (g.dimension() == 2) out << idx[1] << ',';
        out << f[i].real() << ',' << f[i].imag() << '\n';
    }
}

void write(std::ostream& out, const SpectrumFunction& f) {
    const auto& g = f.grid();
    out << (g.dimension() == 1 ? "k,re,im\n" : "k0,k1,re,im\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto k = g.frequency(i);
        out << k[0] << ',';
        if (g.dimension() == 2) out << k[1] << ',';
        out << f[i].real() << ',' << f[i].imag() << '\n';
    }
}

SampledFunction read_sampled(std::istream& in) {
    std::vector<Row> rows;
    const int dim = parse(in, {"i", "re", "im"}, {"i0", "i1", "re", "im"}, rows);
    const auto grid = infer_grid(dim, rows.size());
    return SampledFunction(grid, place(grid, rows, false));
}

SpectrumFunction read_spectrum(std::istream& in) {
    std::vector<Row> rows;
    const int dim = parse(in, {"k", "re", "im"}, {"k0", "k1", "re", "im"}, rows);
    const auto grid = infer_grid(dim, rows.size());
    return SpectrumFunction(grid, place(grid, rows, true));
}

}  // namespace mulharm::csv
