#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Combinatorics of a closed pseudo 3-manifold triangulation: face-pairing
// gluings of tetrahedra and the derived edge/vertex equivalence classes.

namespace cuspflow {

/// One face pairing: face f of the owning tetrahedron maps onto tetrahedron
/// `neighbor` by the vertex relabeling i -> perm[i]; the image face index is
/// perm[f] by construction.
struct FaceGluing {
    int neighbor = -1;
    std::array<int, 4> perm{0, 1, 2, 3};
    bool operator==(const FaceGluing&) const = default;
};

/// Raw gluing data as parsed, no validity guarantees beyond syntax.
/// Unglued faces are left empty; `metric` holds the optional trailing
/// initial edge-length record of the input file.
struct GluingSpec {
    int tet_count = 0;
    std::vector<std::array<std::optional<FaceGluing>, 4>> faces;
    std::optional<std::vector<double>> metric;

    const std::optional<FaceGluing>& gluing(int t, int f) const { return faces[t][f]; }
    bool operator==(const GluingSpec&) const = default;
};

/// A broken invariant found by validate(), located at (tet, face).
struct Violation {
    int tet = 0;
    int face = 0;
    std::string rule;    // "open face" | "not involutive" | "neighbor out of range"
    std::string detail;
};

/// Thrown by the parser with a 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// The triangulation with all derived combinatorics. Immutable once built;
/// safe for concurrent reads.
struct Complex {
    GluingSpec spec;
    int tet_count = 0;
    int edge_count = 0;    // m: number of edge classes
    int vertex_count = 0;  // n: number of vertex classes

    /// Class of local edge e (0..5) of tetrahedron t, index t*6 + e.
    std::vector<int> edge_class;
    /// Class of local vertex v (0..3) of tetrahedron t, index t*4 + v.
    std::vector<int> vertex_class;
    /// Number of local edges identified into each class; sums to 6*tet_count.
    std::vector<int> valence;
    /// Endpoint vertex classes of each edge class, sorted; equal on a loop.
    std::vector<std::array<int, 2>> edge_endpoints;

    int local_edge_class(int t, int e) const { return edge_class[t * 6 + e]; }
    int local_vertex_class(int t, int v) const { return vertex_class[t * 4 + v]; }

    /// The common valence d when all edge classes share one, else empty.
    std::optional<int> constant_valence() const;
};

GluingSpec parse_complex(std::istream& in);
GluingSpec parse_complex(const std::string& text);
GluingSpec parse_complex_file(const std::string& path);
std::string serialize(const GluingSpec& spec);

/// Checks the GluingSpec invariants; empty result means a valid closed
/// pseudo 3-manifold gluing. Violations are data, not errors.
std::vector<Violation> validate(const GluingSpec& spec);

/// Computes edge/vertex classes as orbits of the face-pairing maps
/// (union-find), plus valences and endpoints. Class ids are assigned in
/// order of the lexicographically smallest local representative.
/// Requires validate(spec).empty(); throws std::invalid_argument otherwise.
Complex build_complex(const GluingSpec& spec);

/// m x n matrix B with B(e,v) = number of endpoints of edge class e lying
/// in vertex class v (2 on a loop edge). Every row sums to 2. This is the
/// matrix of the R^V action w -> B w on edge vectors.
Eigen::MatrixXd incidence_matrix(const Complex& c);

}  // namespace cuspflow
