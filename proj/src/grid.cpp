#include "shmm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace shmm {

double GridField2D::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / double(values.size());
}

double GridField2D::min() const { return *std::min_element(values.begin(), values.end()); }

double GridField2D::max() const { return *std::max_element(values.begin(), values.end()); }

void GridField2D::check_finite() const {
    for (std::size_t n = 0; n < values.size(); ++n)
        if (!std::isfinite(values[n]))
            throw InvalidInput("GridField2D: non-finite value at flat index " + std::to_string(n));
}

void GridField2D::write_csv(std::ostream& os) const {
    os << "# " << grid.nx << ',' << grid.ny << ',' << fmt_g17(grid.hx) << ',' << fmt_g17(grid.hy)
       << ',' << fmt_g17(grid.x0) << ',' << fmt_g17(grid.y0) << '\n';
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (i) os << ',';
            os << fmt_g17(at(i, j));
        }
        os << '\n';
    }
}

GridField2D GridField2D::read_csv(std::istream& is, Bc bcx, Bc bcy) {
    std::string line;
    require(bool(std::getline(is, line)) && line.size() > 2 && line[0] == '#',
            "GridField2D: missing header line");
    std::istringstream hdr(line.substr(1));
    int nx = 0, ny = 0;
    double hx = 0, hy = 0, x0 = 0, y0 = 0;
    char c;
    hdr >> nx >> c >> ny >> c >> hx >> c >> hy >> c >> x0 >> c >> y0;
    require(!hdr.fail(), "GridField2D: malformed header");
    Grid2D g(nx, ny, hx, hy, x0, y0, bcx, bcy);
    GridField2D f(g);
    for (int j = 0; j < ny; ++j) {
        require(bool(std::getline(is, line)), "GridField2D: truncated rows");
        std::istringstream row(line);
        for (int i = 0; i < nx; ++i) {
            double v;
            row >> v;
            require(!row.fail(), "GridField2D: malformed row " + std::to_string(j));
            f.at(i, j) = v;
            if (i + 1 < nx) row >> c;
        }
    }
    f.check_finite();
    return f;
}

}  // namespace shmm
