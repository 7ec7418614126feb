#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aimm/core/mesh.hpp"

namespace aimm {

// Plain-text mesh format (see README for the grammar):
//
//   <node count>
//   <x> <y>                 one line per node
//   <triangle count>
//   <i> <j> <k> <tag>       zero-based, counter-clockwise
//   <boundary segment count>
//   <a> <b> <tag>
//
// '#' starts a comment; blank lines are ignored.
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const TriMesh& mesh);
void write_mesh_file(const std::string& path, const TriMesh& mesh);

// Legacy ASCII VTK unstructured-grid writer for viewing results.
// Fields are attached as POINT_DATA; vectors get a zero z-component.
class VtkWriter {
  public:
    explicit VtkWriter(const TriMesh& mesh) : mesh_(&mesh) {}

    void add(const std::string& name, const ScalarField& f);
    void add(const std::string& name, const VectorField& f);
    // per-element scalars (CELL_DATA); values are copied
    void add_cell(const std::string& name, std::vector<double> values);
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;

  private:
    const TriMesh* mesh_;
    std::vector<std::pair<std::string, const ScalarField*>> scalars_;
    std::vector<std::pair<std::string, const VectorField*>> vectors_;
    std::vector<std::pair<std::string, std::vector<double>>> cell_scalars_;
};

}  // namespace aimm
