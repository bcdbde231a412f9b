// Text mesh format:
//   trimesh 2
//   nv nc ne
//   nv lines: x y                 (17 significant digits)
//   nc lines: v0 v1 v2            (0-based, CCW)
//   ne lines: v0 v1 cellL cellR   (low->high vertex ids; -1 marks boundary)
//   optional: periodic npairs, then npairs lines: va vb
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cgdg/mesh.hpp"

namespace cgdg {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
    throw Error("read_mesh: " + path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TriMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_mesh: cannot open " + path);
    int lineno = 0;
    auto next_line = [&](std::istringstream& ss) {
        std::string line;
        if (!std::getline(in, line)) parse_fail(path, lineno + 1, "unexpected end of file");
        ++lineno;
        ss.clear();
        ss.str(line);
    };

    std::istringstream ss;
    next_line(ss);
    std::string magic;
    int dim = 0;
    if (!(ss >> magic >> dim) || magic != "trimesh" || dim != 2)
        parse_fail(path, lineno, "malformed header (expected 'trimesh 2')");

    next_line(ss);
    long long nv = 0, nc = 0, ne = 0;
    if (!(ss >> nv >> nc >> ne) || nv < 3 || nc < 1 || ne < 3)
        parse_fail(path, lineno, "malformed size line");

    std::vector<Vec2> verts(nv);
    for (long long i = 0; i < nv; ++i) {
        next_line(ss);
        if (!(ss >> verts[i].x >> verts[i].y)) parse_fail(path, lineno, "bad vertex line");
    }
    std::vector<std::array<int, 3>> tris(nc);
    for (long long c = 0; c < nc; ++c) {
        next_line(ss);
        if (!(ss >> tris[c][0] >> tris[c][1] >> tris[c][2]))
            parse_fail(path, lineno, "bad triangle line");
        for (int k = 0; k < 3; ++k)
            if (tris[c][k] < 0 || tris[c][k] >= nv)
                parse_fail(path, lineno, "triangle vertex index out of range");
    }
    std::vector<std::array<int, 4>> file_edges(ne);
    for (long long e = 0; e < ne; ++e) {
        next_line(ss);
        auto& fe = file_edges[e];
        if (!(ss >> fe[0] >> fe[1] >> fe[2] >> fe[3])) parse_fail(path, lineno, "bad edge line");
        if (fe[0] < 0 || fe[0] >= nv || fe[1] < 0 || fe[1] >= nv)
            parse_fail(path, lineno, "edge vertex index out of range");
        if (fe[2] >= nc || fe[3] >= nc) parse_fail(path, lineno, "edge cell index out of range");
    }

    std::vector<std::array<int, 2>> pairs;
    std::string tail;
    if (std::getline(in, tail)) {
        ++lineno;
        std::istringstream ps(tail);
        std::string kw;
        long long npairs = 0;
        if (!(ps >> kw >> npairs) || kw != "periodic")
            parse_fail(path, lineno, "expected 'periodic npairs' or end of file");
        pairs.resize(npairs);
        for (long long k = 0; k < npairs; ++k) {
            next_line(ss);
            if (!(ss >> pairs[k][0] >> pairs[k][1])) parse_fail(path, lineno, "bad periodic pair");
        }
    }

    TriMesh mesh = build_trimesh(std::move(verts), std::move(tris), std::move(pairs));

    if (mesh.n_edges() != static_cast<int>(ne))
        throw Error("read_mesh: edge count disagrees with triangle connectivity");
    std::vector<std::array<int, 2>> sorted_edges = mesh.edges;
    std::sort(sorted_edges.begin(), sorted_edges.end());
    for (auto& fe : file_edges) {
        const std::array<int, 2> key = {std::min(fe[0], fe[1]), std::max(fe[0], fe[1])};
        if (!std::binary_search(sorted_edges.begin(), sorted_edges.end(), key))
            throw Error("read_mesh: listed edge not present in triangulation");
    }
    return mesh;
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_mesh: cannot open " + path);
    out << "trimesh 2\n";
    out << mesh.n_vertices() << ' ' << mesh.n_cells() << ' ' << mesh.n_edges() << '\n';
    char buf[96];
    for (const Vec2& v : mesh.vertex_coords) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const auto& cc = mesh.edge_to_cells[e];
        // Boundary edges keep the present cell in the left slot.
        int cl = cc[0], cr = cc[1];
        if (cl == -1) std::swap(cl, cr);
        out << mesh.edges[e][0] << ' ' << mesh.edges[e][1] << ' ' << cl << ' ' << cr << '\n';
    }
    if (mesh.has_periodic) {
        out << "periodic " << mesh.periodic_pairs.size() << '\n';
        for (const auto& p : mesh.periodic_pairs) out << p[0] << ' ' << p[1] << '\n';
    }
    if (!out) throw Error("write_mesh: write failure on " + path);
}

}  // namespace cgdg
