#include "aimm/core/mesh_io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace aimm {

namespace {

// next non-comment, non-blank line
bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        if (!blank) return true;
    }
    return false;
}

[[noreturn]] void bad(const std::string& what) { throw Error("mesh file: " + what); }

long read_count(std::istream& in, const char* what) {
    std::string line;
    if (!next_line(in, line)) bad(std::string("missing ") + what + " count");
    std::istringstream ls(line);
    long n = -1;
    if (!(ls >> n) || n < 0) bad(std::string("malformed ") + what + " count: " + line);
    return n;
}

}  // namespace

TriMesh read_mesh(std::istream& in) {
    std::string line;

    long nn = read_count(in, "node");
    std::vector<Vec2> coords(nn);
    for (long i = 0; i < nn; ++i) {
        if (!next_line(in, line)) bad("truncated node list");
        std::istringstream ls(line);
        if (!(ls >> coords[i].x >> coords[i].y)) bad("malformed node line: " + line);
    }

    long nt = read_count(in, "triangle");
    std::vector<std::array<int, 3>> tris(nt);
    std::vector<int> tri_tags(nt, 0);
    for (long i = 0; i < nt; ++i) {
        if (!next_line(in, line)) bad("truncated triangle list");
        std::istringstream ls(line);
        if (!(ls >> tris[i][0] >> tris[i][1] >> tris[i][2]))
            bad("malformed triangle line: " + line);
        ls >> tri_tags[i];  // tag is optional, defaults to 0
    }

    long nb = read_count(in, "boundary segment");
    TriMesh::BoundaryTags btags;
    for (long i = 0; i < nb; ++i) {
        if (!next_line(in, line)) bad("truncated boundary list");
        std::istringstream bs(line);
        int a, b, tag;
        if (!(bs >> a >> b >> tag)) bad("malformed boundary line: " + line);
        btags[std::minmax(a, b)] = tag;
    }
    return TriMesh::build(std::move(coords), std::move(tris), std::move(btags),
                          std::move(tri_tags));
}

TriMesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file: " + path);
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
    out << "# aimm mesh: nodes, triangles (i j k tag), boundary segments (a b tag)\n";
    out << std::setprecision(17);
    out << mesh.n_nodes() << "\n";
    for (int n = 0; n < mesh.n_nodes(); ++n)
        out << mesh.coord(n).x << " " << mesh.coord(n).y << "\n";
    out << mesh.n_tris() << "\n";
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const auto& tr = mesh.tri(t);
        out << tr[0] << " " << tr[1] << " " << tr[2] << " " << mesh.tri_tags()[t] << "\n";
    }
    out << mesh.boundary_tags().size() << "\n";
    for (const auto& [key, tag] : mesh.boundary_tags())
        out << key.first << " " << key.second << " " << tag << "\n";
}

void write_mesh_file(const std::string& path, const TriMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open mesh file for writing: " + path);
    write_mesh(out, mesh);
}

void VtkWriter::add(const std::string& name, const ScalarField& f) {
    if (f.gen != mesh_->generation()) throw StaleField(f.gen, mesh_->generation());
    scalars_.emplace_back(name, &f);
}

void VtkWriter::add(const std::string& name, const VectorField& f) {
    if (f.gen != mesh_->generation()) throw StaleField(f.gen, mesh_->generation());
    vectors_.emplace_back(name, &f);
}

void VtkWriter::add_cell(const std::string& name, std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(mesh_->n_tris()))
        throw Error("cell data '" + name + "' size does not match triangle count");
    cell_scalars_.emplace_back(name, std::move(values));
}

void VtkWriter::write(std::ostream& out) const {
    const TriMesh& m = *mesh_;
    out << "# vtk DataFile Version 3.0\n";
    out << "aimm output\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << std::setprecision(12);
    out << "POINTS " << m.n_nodes() << " double\n";
    for (int n = 0; n < m.n_nodes(); ++n)
        out << m.coord(n).x << " " << m.coord(n).y << " 0\n";
    out << "CELLS " << m.n_tris() << " " << 4 * m.n_tris() << "\n";
    for (const auto& t : m.tris()) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << m.n_tris() << "\n";
    for (int t = 0; t < m.n_tris(); ++t) out << "5\n";
    if (!scalars_.empty() || !vectors_.empty()) {
        out << "POINT_DATA " << m.n_nodes() << "\n";
        for (const auto& [name, f] : scalars_) {
            out << "SCALARS " << name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : f->values) out << v << "\n";
        }
        for (const auto& [name, f] : vectors_) {
            out << "VECTORS " << name << " double\n";
            for (Vec2 v : f->values) out << v.x << " " << v.y << " 0\n";
        }
    }
    if (!cell_scalars_.empty()) {
        out << "CELL_DATA " << m.n_tris() << "\n";
        for (const auto& [name, vals] : cell_scalars_) {
            out << "SCALARS " << name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : vals) out << v << "\n";
        }
    }
}

void VtkWriter::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open vtk file for writing: " + path);
    write(out);
}

}  // namespace aimm
