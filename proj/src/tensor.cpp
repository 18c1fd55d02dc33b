#include "shmm/tensor.hpp"

#include <cmath>
#include <sstream>

namespace shmm {

std::pair<double, double> DiffTensor2::eigenvalues() const {
    double tr = k11 + k22;
    double disc = std::sqrt(std::max(0.0, 0.25 * (k11 - k22) * (k11 - k22) + k12 * k12));
    return {0.5 * tr - disc, 0.5 * tr + disc};
}

double DiffTensor2::max_abs_diff(const DiffTensor2& o) const {
    return std::max({std::abs(k11 - o.k11), std::abs(k12 - o.k12), std::abs(k22 - o.k22)});
}

std::string DiffTensor2::csv() const {
    return fmt_g17(k11) + "," + fmt_g17(k12) + "," + fmt_g17(k22);
}

DiffTensor2 DiffTensor2::from_csv(const std::string& line) {
    std::istringstream ss(line);
    DiffTensor2 t;
    char c;
    ss >> t.k11 >> c >> t.k12 >> c >> t.k22;
    require(!ss.fail(), "DiffTensor2: malformed csv triple: " + line);
    return t;
}

}  // namespace shmm
