#include "cuspflow/complex.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cuspflow/tetra.hpp"

namespace cuspflow {

namespace {

// Plain union-find over 0..n-1 with path halving.
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

// Canonical class ids in order of first appearance, i.e. by the smallest
// local representative.
std::vector<int> canonical_classes(UnionFind& uf, int n, int* count) {
    std::vector<int> id(n, -1), cls(n);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int r = uf.find(i);
        if (id[r] < 0) id[r] = next++;
        cls[i] = id[r];
    }
    *count = next;
    return cls;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

int parse_int(const std::string& tok, int line, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
    return v;
}

std::array<int, 4> parse_perm(const std::string& tok, int line) {
    if (tok.size() != 4)
        throw ParseError(line, "malformed permutation '" + tok + "' (need 4 digits)");
    std::array<int, 4> p{};
    std::array<bool, 4> seen{};
    for (int i = 0; i < 4; ++i) {
        char c = tok[i];
        if (c < '0' || c > '3')
            throw ParseError(line, "malformed permutation '" + tok + "' (digit out of 0..3)");
        p[i] = c - '0';
        if (seen[p[i]])
            throw ParseError(line, "malformed permutation '" + tok + "' (repeated digit)");
        seen[p[i]] = true;
    }
    return p;
}

std::array<int, 4> inverse(const std::array<int, 4>& p) {
    std::array<int, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[p[i]] = i;
    return inv;
}

bool is_identity(const std::array<int, 4>& p) { return p == std::array<int, 4>{0, 1, 2, 3}; }

}  // namespace

GluingSpec parse_complex(std::istream& in) {
    GluingSpec spec;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    bool have_metric = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        if (!have_header) {
            if (tok[0] != "tetrahedra")
                throw ParseError(lineno, "expected 'tetrahedra <N>' header, got '" + tok[0] + "'");
            if (tok.size() != 2) throw ParseError(lineno, "expected 'tetrahedra <N>'");
            spec.tet_count = parse_int(tok[1], lineno, "tetrahedron count");
            if (spec.tet_count <= 0) throw ParseError(lineno, "tetrahedron count must be positive");
            spec.faces.resize(spec.tet_count);
            have_header = true;
            continue;
        }
        if (tok[0] == "glue") {
            if (have_metric) throw ParseError(lineno, "glue record after metric record");
            if (tok.size() != 6 || tok[3] != "->")
                throw ParseError(lineno, "expected 'glue <t> <f> -> <t'> <p0p1p2p3>'");
            int t = parse_int(tok[1], lineno, "tetrahedron index");
            int f = parse_int(tok[2], lineno, "face index");
            int t2 = parse_int(tok[4], lineno, "neighbor index");
            if (t < 0 || t >= spec.tet_count)
                throw ParseError(lineno, "tetrahedron index " + std::to_string(t) + " out of range");
            if (f < 0 || f > 3) throw ParseError(lineno, "face index " + std::to_string(f) + " out of range");
            if (t2 < 0 || t2 >= spec.tet_count)
                throw ParseError(lineno, "neighbor index " + std::to_string(t2) + " out of range");
            if (spec.faces[t][f])
                throw ParseError(lineno, "duplicate gluing for tetrahedron " + std::to_string(t) +
                                             " face " + std::to_string(f));
            spec.faces[t][f] = FaceGluing{t2, parse_perm(tok[5], lineno)};
        } else if (tok[0] == "metric") {
            if (have_metric) throw ParseError(lineno, "duplicate metric record");
            std::vector<double> m;
            for (size_t i = 1; i < tok.size(); ++i) {
                try {
                    size_t used = 0;
                    m.push_back(std::stod(tok[i], &used));
                    if (used != tok[i].size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw ParseError(lineno, "bad metric value '" + tok[i] + "'");
                }
            }
            spec.metric = std::move(m);
            have_metric = true;
        } else {
            throw ParseError(lineno, "unknown record '" + tok[0] + "'");
        }
    }
    if (!have_header) throw ParseError(lineno, "missing 'tetrahedra <N>' header");
    return spec;
}

GluingSpec parse_complex(const std::string& text) {
    std::istringstream ss(text);
    return parse_complex(ss);
}

GluingSpec parse_complex_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_complex(in);
}

std::string serialize(const GluingSpec& spec) {
    std::ostringstream out;
    out << "tetrahedra " << spec.tet_count << "\n";
    for (int t = 0; t < spec.tet_count; ++t)
        for (int f = 0; f < 4; ++f)
            if (const auto& g = spec.faces[t][f]) {
                out << "glue " << t << " " << f << " -> " << g->neighbor << " ";
                for (int i = 0; i < 4; ++i) out << g->perm[i];
                out << "\n";
            }
    if (spec.metric) {
        out << "metric";
        char buf[32];
        for (double v : *spec.metric) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

std::vector<Violation> validate(const GluingSpec& spec) {
    std::vector<Violation> out;
    for (int t = 0; t < spec.tet_count; ++t) {
        for (int f = 0; f < 4; ++f) {
            const auto& g = spec.faces[t][f];
            if (!g) {
                out.push_back({t, f, "open face", "face is not glued"});
                continue;
            }
            if (g->neighbor < 0 || g->neighbor >= spec.tet_count) {
                out.push_back({t, f, "neighbor out of range",
                               "neighbor " + std::to_string(g->neighbor)});
                continue;
            }
            int f2 = g->perm[f];
            const auto& back = spec.faces[g->neighbor][f2];
            if (!back) {
                out.push_back({t, f, "not involutive",
                               "image face (" + std::to_string(g->neighbor) + "," +
                                   std::to_string(f2) + ") is not glued"});
                continue;
            }
            if (back->neighbor != t) {
                out.push_back({t, f, "not involutive",
                               "image face glues to tetrahedron " + std::to_string(back->neighbor) +
                                   ", not back to " + std::to_string(t)});
                continue;
            }
            std::array<int, 4> comp{};
            for (int i = 0; i < 4; ++i) comp[i] = back->perm[g->perm[i]];
            if (!is_identity(comp)) {
                out.push_back({t, f, "not involutive",
                               "composition with the image gluing is not the identity"});
            }
        }
    }
    return out;
}

Complex build_complex(const GluingSpec& spec) {
    if (auto v = validate(spec); !v.empty())
        throw std::invalid_argument("build_complex: spec has " + std::to_string(v.size()) +
                                    " violation(s); first: (" + std::to_string(v[0].tet) + "," +
                                    std::to_string(v[0].face) + ") " + v[0].rule);
    Complex c;
    c.spec = spec;
    c.tet_count = spec.tet_count;

    UnionFind edges(6 * c.tet_count), vertices(4 * c.tet_count);
    for (int t = 0; t < c.tet_count; ++t) {
        for (int f = 0; f < 4; ++f) {
            const auto& g = *spec.faces[t][f];
            // Identify the three vertices and three edges of face f with
            // their images under the pairing.
            for (int v = 0; v < 4; ++v) {
                if (v == f) continue;
                vertices.unite(t * 4 + v, g.neighbor * 4 + g.perm[v]);
            }
            for (int i = 0; i < 4; ++i) {
                if (i == f) continue;
                for (int j = i + 1; j < 4; ++j) {
                    if (j == f) continue;
                    edges.unite(t * 6 + edge_index(i, j),
                                g.neighbor * 6 + edge_index(g.perm[i], g.perm[j]));
                }
            }
        }
    }
    c.edge_class = canonical_classes(edges, 6 * c.tet_count, &c.edge_count);
    c.vertex_class = canonical_classes(vertices, 4 * c.tet_count, &c.vertex_count);

    c.valence.assign(c.edge_count, 0);
    for (int cls : c.edge_class) ++c.valence[cls];

    c.edge_endpoints.assign(c.edge_count, {-1, -1});
    for (int t = 0; t < c.tet_count; ++t) {
        for (int e = 0; e < 6; ++e) {
            int cls = c.edge_class[t * 6 + e];
            if (c.edge_endpoints[cls][0] >= 0) continue;
            auto [i, j] = edge_vertices(e);
            int a = c.vertex_class[t * 4 + i], b = c.vertex_class[t * 4 + j];
            c.edge_endpoints[cls] = {std::min(a, b), std::max(a, b)};
        }
    }
    return c;
}

std::optional<int> Complex::constant_valence() const {
    if (valence.empty()) return std::nullopt;
    int d = valence[0];
    for (int v : valence)
        if (v != d) return std::nullopt;
    return d;
}

Eigen::MatrixXd incidence_matrix(const Complex& c) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(c.edge_count, c.vertex_count);
    for (int e = 0; e < c.edge_count; ++e) {
        b(e, c.edge_endpoints[e][0]) += 1.0;
        b(e, c.edge_endpoints[e][1]) += 1.0;
    }
    return b;
}

}  // namespace cuspflow
