#include "published_tables.hpp"

#include <map>

namespace orderthresh::detail {

namespace {

const std::map<std::string, PublishedTable>& catalog() {
  static const std::map<std::string, PublishedTable> tables = {
      {"table1",
       {{
            {"n=50", {0.0003, 0.0099, 0.0231, 0.0341, 0.0431, 0.0493}},
            {"n=100", {0.0101, 0.0229, 0.0324, 0.0390, 0.0461, 0.0504}},
            {"n=200", {0.0231, 0.0316, 0.0382, 0.0439, 0.0484, 0.0507}},
            {"n=500", {0.0327, 0.0388, 0.0422, 0.0465, 0.0502, 0.0535}},
        }}},
      {"table2",
       {{
            {"n=50", {0.0543, 0.0588, 0.0614, 0.0654, 0.0663}},
            {"n=100", {0.0552, 0.0559, 0.0597, 0.0616, 0.0631}},
            {"n=200", {0.0539, 0.0562, 0.0590, 0.0601, 0.0627}},
            {"n=500", {0.0540, 0.0563, 0.0583, 0.0604, 0.0623}},
        }}},
      {"table3",
       {{
            {"n=50", {0.0696, 0.0685, 0.0646, 0.0646, 0.0635, 0.0630, 0.0623, 0.0626}},
            {"n=100", {0.0669, 0.0640, 0.0606, 0.0600, 0.0591, 0.0577, 0.0585, 0.0589}},
            {"n=200", {0.0667, 0.0620, 0.0603, 0.0589, 0.0582, 0.0583, 0.0555, 0.0560}},
            {"n=500", {0.0665, 0.0631, 0.0577, 0.0559, 0.0536, 0.0536, 0.0535, 0.0547}},
        }}},
      {"table3app",
       {{
            {"n=50", {0.0565, 0.0545, 0.0531, 0.0531, 0.0532, 0.0534, 0.0540, 0.0546}},
            {"n=100", {0.0566, 0.0540, 0.0520, 0.0522, 0.0519, 0.0507, 0.0518, 0.0520}},
            {"n=200", {0.0555, 0.0547, 0.0536, 0.0531, 0.0526, 0.0523, 0.0530, 0.0516}},
            {"n=500", {0.0589, 0.0556, 0.0552, 0.0530, 0.0520, 0.0521, 0.0508, 0.0505}},
        }}},
      {"table4",
       {{
            {"H1", {30, 0.843, 0.944, 0.977, 0.975, 0.976, 0.973, 0.968, 0.960, 0.938, 0.913}},
            {"H3", {28, 0.845, 0.942, 0.978, 0.975, 0.976, 0.975, 0.969, 0.961, 0.937, 0.910}},
            {"H5", {26, 0.840, 0.926, 0.972, 0.970, 0.971, 0.966, 0.956, 0.943, 0.911, 0.879}},
            {"H7", {24, 0.796, 0.893, 0.950, 0.948, 0.949, 0.942, 0.929, 0.915, 0.880, 0.851}},
            {"H8", {23, 0.777, 0.845, 0.933, 0.928, 0.932, 0.915, 0.891, 0.875, 0.818, 0.775}},
            {"H10", {21, 0.764, 0.817, 0.908, 0.900, 0.907, 0.891, 0.868, 0.841, 0.785, 0.744}},
            {"H11", {20, 0.766, 0.792, 0.905, 0.899, 0.906, 0.883, 0.853, 0.832, 0.764, 0.712}},
            {"H12", {19, 0.764, 0.783, 0.903, 0.897, 0.903, 0.873, 0.841, 0.812, 0.751, 0.709}},
            {"H13", {18, 0.750, 0.752, 0.881, 0.875, 0.880, 0.845, 0.804, 0.776, 0.709, 0.662}},
            {"H14", {17, 0.739, 0.734, 0.864, 0.858, 0.869, 0.836, 0.789, 0.760, 0.694, 0.649}},
            {"H15", {16, 0.559, 0.574, 0.724, 0.707, 0.723, 0.671, 0.633, 0.608, 0.541, 0.495}},
            {"H16", {15, 0.526, 0.564, 0.707, 0.693, 0.707, 0.660, 0.611, 0.574, 0.517, 0.484}},
            {"H17", {14, 0.532, 0.529, 0.675, 0.661, 0.677, 0.625, 0.574, 0.542, 0.467, 0.432}},
            {"H18", {13, 0.464, 0.435, 0.584, 0.568, 0.590, 0.534, 0.496, 0.458, 0.404, 0.373}},
            {"H19", {12, 0.483, 0.402, 0.570, 0.556, 0.574, 0.500, 0.459, 0.427, 0.374, 0.347}},
            {"H20", {11, 0.470, 0.380, 0.547, 0.533, 0.551, 0.475, 0.425, 0.395, 0.343, 0.308}},
            {"H21", {10, 0.467, 0.390, 0.555, 0.540, 0.559, 0.490, 0.433, 0.402, 0.341, 0.319}},
            {"H22", {9, 0.460, 0.364, 0.534, 0.515, 0.535, 0.454, 0.402, 0.368, 0.313, 0.281}},
            {"H23", {8, 0.460, 0.362, 0.517, 0.503, 0.522, 0.447, 0.389, 0.351, 0.301, 0.279}},
            {"H24", {7, 0.417, 0.290, 0.450, 0.434, 0.455, 0.375, 0.318, 0.288, 0.248, 0.230}},
            {"H0G", {0, 0.052, 0.050, 0.059, 0.057, 0.057, 0.054, 0.052, 0.051, 0.052, 0.055}},
        }}},
      {"table6",
       {{
            {"H1", {30, 0.650, 0.574, 0.759, 0.745, 0.760, 0.699, 0.651, 0.608, 0.548, 0.513}},
            {"H2", {29, 0.680, 0.584, 0.755, 0.741, 0.761, 0.700, 0.649, 0.612, 0.544, 0.504}},
            {"H3", {28, 0.652, 0.565, 0.745, 0.729, 0.747, 0.684, 0.640, 0.602, 0.540, 0.498}},
            {"H6", {25, 0.666, 0.549, 0.728, 0.717, 0.732, 0.667, 0.625, 0.591, 0.521, 0.479}},
            {"H7", {24, 0.677, 0.562, 0.743, 0.729, 0.745, 0.686, 0.632, 0.591, 0.522, 0.482}},
            {"H8", {23, 0.666, 0.536, 0.716, 0.703, 0.724, 0.657, 0.612, 0.569, 0.508, 0.478}},
            {"H10", {21, 0.340, 0.350, 0.449, 0.434, 0.445, 0.418, 0.394, 0.367, 0.333, 0.317}},
            {"H12", {19, 0.351, 0.342, 0.444, 0.426, 0.443, 0.410, 0.383, 0.362, 0.341, 0.305}},
            {"H13", {18, 0.342, 0.330, 0.456, 0.442, 0.450, 0.416, 0.388, 0.367, 0.335, 0.316}},
            {"H14", {17, 0.350, 0.331, 0.448, 0.432, 0.451, 0.412, 0.377, 0.363, 0.325, 0.300}},
            {"H15", {16, 0.337, 0.334, 0.432, 0.416, 0.431, 0.402, 0.375, 0.356, 0.327, 0.307}},
            {"H16", {15, 0.330, 0.294, 0.406, 0.393, 0.403, 0.371, 0.338, 0.319, 0.293, 0.274}},
            {"H17", {14, 0.357, 0.282, 0.399, 0.387, 0.403, 0.352, 0.323, 0.305, 0.267, 0.252}},
            {"H18", {13, 0.325, 0.290, 0.393, 0.378, 0.390, 0.358, 0.329, 0.312, 0.276, 0.261}},
            {"H19", {12, 0.337, 0.296, 0.413, 0.396, 0.412, 0.368, 0.337, 0.314, 0.277, 0.255}},
            {"H20", {11, 0.343, 0.291, 0.399, 0.383, 0.399, 0.349, 0.314, 0.296, 0.270, 0.250}},
            {"H21", {10, 0.346, 0.290, 0.405, 0.391, 0.404, 0.356, 0.321, 0.306, 0.268, 0.248}},
            {"H22", {9, 0.224, 0.198, 0.264, 0.251, 0.262, 0.237, 0.220, 0.208, 0.195, 0.189}},
            {"H23", {8, 0.196, 0.190, 0.257, 0.242, 0.253, 0.228, 0.216, 0.197, 0.191, 0.182}},
            {"H24", {7, 0.207, 0.182, 0.256, 0.245, 0.253, 0.225, 0.212, 0.200, 0.186, 0.179}},
        }}},
      {"table7",
       {{
            {"H1", {30, 0.674, 0.959, 0.973, 0.970, 0.969, 0.976, 0.982, 0.981, 0.970, 0.962}},
            {"H3", {28, 0.643, 0.954, 0.966, 0.960, 0.955, 0.974, 0.974, 0.973, 0.960, 0.947}},
            {"H4", {27, 0.617, 0.935, 0.957, 0.954, 0.945, 0.965, 0.963, 0.961, 0.950, 0.934}},
            {"H6", {25, 0.598, 0.900, 0.936, 0.931, 0.926, 0.947, 0.943, 0.941, 0.922, 0.903}},
            {"H8", {23, 0.566, 0.872, 0.912, 0.905, 0.902, 0.920, 0.917, 0.911, 0.891, 0.865}},
            {"H10", {21, 0.529, 0.831, 0.877, 0.869, 0.862, 0.889, 0.886, 0.875, 0.849, 0.817}},
            {"H12", {19, 0.509, 0.777, 0.837, 0.828, 0.821, 0.843, 0.833, 0.821, 0.786, 0.753}},
            {"H13", {18, 0.481, 0.740, 0.816, 0.803, 0.802, 0.813, 0.803, 0.785, 0.738, 0.703}},
            {"H14", {17, 0.472, 0.715, 0.785, 0.773, 0.772, 0.784, 0.773, 0.763, 0.710, 0.671}},
            {"H15", {16, 0.448, 0.674, 0.748, 0.732, 0.736, 0.749, 0.735, 0.715, 0.669, 0.633}},
            {"H16", {15, 0.418, 0.630, 0.715, 0.700, 0.702, 0.706, 0.686, 0.668, 0.624, 0.585}},
            {"H17", {14, 0.393, 0.569, 0.658, 0.645, 0.645, 0.646, 0.629, 0.610, 0.562, 0.523}},
            {"H18", {13, 0.368, 0.522, 0.629, 0.616, 0.623, 0.620, 0.597, 0.573, 0.523, 0.489}},
            {"H19", {12, 0.341, 0.498, 0.593, 0.577, 0.582, 0.582, 0.552, 0.525, 0.486, 0.451}},
            {"H20", {11, 0.328, 0.441, 0.539, 0.527, 0.539, 0.519, 0.491, 0.472, 0.436, 0.407}},
            {"H21", {10, 0.306, 0.390, 0.487, 0.470, 0.480, 0.464, 0.436, 0.421, 0.382, 0.353}},
            {"H22", {9, 0.285, 0.354, 0.439, 0.423, 0.438, 0.422, 0.393, 0.379, 0.344, 0.317}},
            {"H23", {8, 0.260, 0.298, 0.393, 0.374, 0.386, 0.367, 0.342, 0.318, 0.292, 0.276}},
            {"H24", {7, 0.245, 0.265, 0.349, 0.333, 0.346, 0.315, 0.296, 0.283, 0.255, 0.236}},
            {"H25", {6, 0.221, 0.224, 0.300, 0.286, 0.295, 0.272, 0.257, 0.245, 0.228, 0.213}},
        }}},
      {"table8",
       {{
            {"a=50 n=3", {0.0522, 0.0551, 0.0601, 0.0601, 0.0623, 0.0635, 0.0637, 0.0669}},
            {"a=50 n=5", {0.0551, 0.0583, 0.0591, 0.0591, 0.0588, 0.0600, 0.0612, 0.0619}},
            {"a=100 n=3", {0.0506, 0.0521, 0.0561, 0.0563, 0.0594, 0.0607, 0.0617, 0.0634}},
            {"a=100 n=5", {0.0539, 0.0541, 0.0541, 0.0549, 0.0571, 0.0578, 0.0596, 0.0604}},
            {"a=200 n=3", {0.0436, 0.0440, 0.0490, 0.0497, 0.0552, 0.0571, 0.0601, 0.0597}},
            {"a=200 n=5", {0.0548, 0.0520, 0.0505, 0.0504, 0.0515, 0.0529, 0.0542, 0.0549}},
            {"a=500 n=3", {0.0436, 0.0437, 0.0452, 0.0466, 0.0515, 0.0558, 0.0593, 0.0589}},
            {"a=500 n=5", {0.0533, 0.0492, 0.0474, 0.0481, 0.0510, 0.0518, 0.0532, 0.0534}},
            {"a=1000 n=3", {0.0427, 0.0403, 0.0405, 0.0411, 0.0475, 0.0513, 0.0548, 0.0557}},
            {"a=1000 n=5", {0.0517, 0.0486, 0.0459, 0.0453, 0.0466, 0.0484, 0.0507, 0.0521}},
        }}},
      {"table9",
       {{
            {"H1", {20, 0.8612, 0.9992, 0.9975, 0.9877, 0.9482, 0.8923, 0.8682}},
            {"H2", {19, 0.7887, 0.9963, 0.9889, 0.9685, 0.9000, 0.8270, 0.7978}},
            {"H3", {18, 0.7561, 0.9957, 0.9878, 0.9623, 0.8762, 0.7971, 0.7658}},
            {"H4", {17, 0.7505, 0.9952, 0.9848, 0.9588, 0.8743, 0.7924, 0.7601}},
            {"H5", {16, 0.7541, 0.9949, 0.9841, 0.9591, 0.8801, 0.7944, 0.7633}},
            {"H6", {15, 0.6785, 0.9901, 0.9712, 0.9275, 0.8175, 0.7238, 0.6891}},
            {"H7", {14, 0.6434, 0.9859, 0.9634, 0.9116, 0.7856, 0.6887, 0.6563}},
            {"H8", {13, 0.6432, 0.9855, 0.9623, 0.9100, 0.7876, 0.6905, 0.6547}},
            {"H9", {12, 0.5091, 0.9422, 0.8861, 0.8008, 0.6505, 0.5518, 0.5193}},
            {"H10", {11, 0.4434, 0.9191, 0.8399, 0.7351, 0.5794, 0.4868, 0.4553}},
            {"H11", {10, 0.4444, 0.9191, 0.8399, 0.7355, 0.5742, 0.4855, 0.4561}},
            {"H12", {9, 0.4448, 0.9230, 0.8414, 0.7333, 0.5760, 0.4847, 0.4562}},
            {"H13", {8, 0.3896, 0.8894, 0.7869, 0.6756, 0.5132, 0.4264, 0.4007}},
            {"H14", {7, 0.2887, 0.7710, 0.6364, 0.5169, 0.3835, 0.3185, 0.2989}},
            {"H15", {6, 0.2615, 0.7437, 0.6051, 0.4866, 0.3537, 0.2903, 0.2724}},
            {"H16", {5, 0.2095, 0.6603, 0.5037, 0.3878, 0.2803, 0.2321, 0.2187}},
            {"H17", {4, 0.2089, 0.6560, 0.5002, 0.3869, 0.2742, 0.2319, 0.2169}},
            {"H18", {3, 0.1356, 0.4002, 0.2874, 0.2250, 0.1686, 0.1482, 0.1421}},
            {"H19", {2, 0.0816, 0.1736, 0.1287, 0.1106, 0.0943, 0.0884, 0.0867}},
            {"H20", {1, 0.0812, 0.1743, 0.1277, 0.1095, 0.0934, 0.0880, 0.0862}},
        }}},
      {"table10",
       {{
            {"H1", {20, 0.7680, 0.9978, 0.9886, 0.9657, 0.8877, 0.8089, 0.7769}},
            {"H2", {19, 0.7275, 0.9968, 0.9861, 0.9550, 0.8603, 0.7732, 0.7366}},
            {"H3", {18, 0.7241, 0.9960, 0.9842, 0.9533, 0.8563, 0.7669, 0.7330}},
            {"H4", {17, 0.6278, 0.9893, 0.9640, 0.9048, 0.7740, 0.6731, 0.6394}},
            {"H5", {16, 0.6253, 0.9886, 0.9624, 0.9052, 0.7702, 0.6730, 0.6373}},
            {"H6", {15, 0.6188, 0.9892, 0.9624, 0.9031, 0.7681, 0.6667, 0.6306}},
            {"H7", {14, 0.6011, 0.9872, 0.9577, 0.8891, 0.7464, 0.6462, 0.6119}},
            {"H8", {13, 0.5871, 0.9872, 0.9519, 0.8829, 0.7369, 0.6337, 0.5982}},
            {"H9", {12, 0.5831, 0.9870, 0.9530, 0.8819, 0.7406, 0.6342, 0.5962}},
            {"H10", {11, 0.5614, 0.9849, 0.9467, 0.8730, 0.7151, 0.6097, 0.5750}},
            {"H11", {10, 0.4476, 0.9526, 0.8704, 0.7600, 0.5872, 0.4900, 0.4598}},
            {"H12", {9, 0.4009, 0.9411, 0.8435, 0.7224, 0.5399, 0.4405, 0.4121}},
            {"H13", {8, 0.2521, 0.7461, 0.5879, 0.4612, 0.3297, 0.2770, 0.2612}},
            {"H14", {7, 0.2495, 0.7446, 0.5843, 0.4573, 0.3319, 0.2742, 0.2597}},
            {"H15", {6, 0.1831, 0.6204, 0.4465, 0.3361, 0.2419, 0.2026, 0.1913}},
            {"H16", {5, 0.1820, 0.6119, 0.4411, 0.3383, 0.2407, 0.2014, 0.1898}},
            {"H17", {4, 0.1283, 0.4346, 0.2941, 0.2197, 0.1613, 0.1412, 0.1356}},
            {"H18", {3, 0.1296, 0.4389, 0.2959, 0.2195, 0.1654, 0.1434, 0.1363}},
            {"H19", {2, 0.1195, 0.4202, 0.2793, 0.2084, 0.1515, 0.1308, 0.1258}},
            {"H20", {1, 0.1176, 0.4207, 0.2763, 0.2041, 0.1532, 0.1296, 0.1238}},
        }}},
      {"table11",
       {{
            {"H1", {20, 1.000}},
            {"H2", {19, 0.996}},
            {"H3", {18, 0.993}},
            {"H4", {17, 0.994}},
            {"H5", {16, 0.995}},
            {"H6", {15, 0.987}},
            {"H7", {14, 0.980}},
            {"H8", {13, 0.981}},
            {"H9", {12, 0.938}},
            {"H10", {11, 0.904}},
            {"H11", {10, 0.911}},
            {"H12", {9, 0.900}},
            {"H13", {8, 0.883}},
            {"H14", {7, 0.774}},
            {"H15", {6, 0.722}},
            {"H16", {5, 0.674}},
            {"H17", {4, 0.661}},
            {"H18", {3, 0.398}},
            {"H19", {2, 0.182}},
            {"H20", {1, 0.175}},
        }}},
  };
  return tables;
}

}  // namespace

const PublishedTable* find_published(const std::string& name) {
  const auto& t = catalog();
  const auto it = t.find(name);
  return it == t.end() ? nullptr : &it->second;
}

}  // namespace orderthresh::detail
