//! Predictor contract `(observation, query) -> (global class probabilities,
//! query heatmap)` and its backends.
//!
//! Every backend emits all ten class maps; the query heatmap is the selected
//! channel. Built-in backends are pure functions of their inputs. External
//! models are reached over `SSP1` on a TCP socket, a Unix socket, or the
//! stdin/stdout of a child process.

pub mod protocol;

use std::fmt;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use thiserror::Error;

use crate::explore::ObservationFrame;
use crate::grid::{onehot_encode, Cell, ClassId, LabelGrid, SemanticGrid, NUM_CLASSES};

pub use protocol::{decode_response, encode_request, encode_response, ProtocolError};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("query class {0} is not a room class")]
    BadQuery(u8),
    #[error("shape mismatch: frame is {frame_h}x{frame_w}, backend produced {got_h}x{got_w}")]
    ShapeMismatch {
        frame_h: usize,
        frame_w: usize,
        got_h: usize,
        got_w: usize,
    },
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("cannot connect to `{endpoint}`: {reason}")]
    Connect { endpoint: String, reason: String },
    #[error("frequency prior needs a non-empty census")]
    EmptyCensus,
}

/// Query-class heatmap, row-major, values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f32>,
}

impl Heatmap {
    pub fn zeros(height: usize, width: usize) -> Self {
        Heatmap {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> f32 {
        self.values[cell.row * self.width + cell.col]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionResult {
    pub global_probs: SemanticGrid,
    pub area_prob: Heatmap,
    pub query: ClassId,
}

impl PredictionResult {
    /// Builds a result whose heatmap is channel `query` of `global_probs`.
    pub fn select(global_probs: SemanticGrid, query: ClassId) -> Self {
        let area_prob = Heatmap {
            height: global_probs.height(),
            width: global_probs.width(),
            values: global_probs.channel(query),
        };
        PredictionResult {
            global_probs,
            area_prob,
            query,
        }
    }

    pub fn argmax(&self) -> LabelGrid {
        self.global_probs.argmax()
    }
}

/// Relative frequency of each class over a training census.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassFrequencies(pub [f64; NUM_CLASSES]);

impl ClassFrequencies {
    pub fn from_census(census: &[u64; NUM_CLASSES]) -> Result<Self, PredictError> {
        let total: u64 = census.iter().sum();
        if total == 0 {
            return Err(PredictError::EmptyCensus);
        }
        let mut f = [0.0; NUM_CLASSES];
        for (slot, n) in f.iter_mut().zip(census) {
            *slot = *n as f64 / total as f64;
        }
        Ok(ClassFrequencies(f))
    }
}

/// Backend selection, as configured by the user.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictorKind {
    Oracle,
    Uniform,
    /// Every channel set to one value; `Constant(0.0)` is the zero-mass backend.
    Constant(f32),
    FrequencyPrior(ClassFrequencies),
    External(String),
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorKind::Oracle => f.write_str("oracle"),
            PredictorKind::Uniform => f.write_str("uniform"),
            PredictorKind::Constant(v) => write!(f, "constant:{v}"),
            PredictorKind::FrequencyPrior(_) => f.write_str("frequency"),
            PredictorKind::External(endpoint) => write!(f, "external:{endpoint}"),
        }
    }
}

impl PredictorKind {
    /// Instantiates the backend for one plan. The oracle reads `gt`; the
    /// others ignore it. External backends connect here.
    pub fn build(&self, gt: &LabelGrid) -> Result<Box<dyn Predictor>, PredictError> {
        Ok(match self {
            PredictorKind::Oracle => Box::new(Oracle::new(gt.clone())),
            PredictorKind::Uniform => Box::new(Constant::uniform()),
            PredictorKind::Constant(v) => Box::new(Constant(*v)),
            PredictorKind::FrequencyPrior(freqs) => Box::new(FrequencyPrior::new(*freqs)),
            PredictorKind::External(endpoint) => Box::new(External::connect(endpoint)?),
        })
    }
}

pub trait Predictor: Send {
    fn predict(&mut self, frame: &ObservationFrame, q: ClassId) -> Result<PredictionResult, PredictError>;
}

fn check_query(q: ClassId) -> Result<(), PredictError> {
    if q.is_query() {
        Ok(())
    } else {
        Err(PredictError::BadQuery(q.id()))
    }
}

fn check_dims(frame: &ObservationFrame, h: usize, w: usize) -> Result<(), PredictError> {
    if (frame.height(), frame.width()) == (h, w) {
        Ok(())
    } else {
        Err(PredictError::ShapeMismatch {
            frame_h: frame.height(),
            frame_w: frame.width(),
            got_h: h,
            got_w: w,
        })
    }
}

/// Returns the ground truth.
#[derive(Clone, Debug)]
pub struct Oracle {
    gt: SemanticGrid,
}

impl Oracle {
    pub fn new(gt: LabelGrid) -> Self {
        Oracle { gt: onehot_encode(&gt) }
    }
}

impl Predictor for Oracle {
    fn predict(&mut self, frame: &ObservationFrame, q: ClassId) -> Result<PredictionResult, PredictError> {
        check_query(q)?;
        check_dims(frame, self.gt.height(), self.gt.width())?;
        Ok(PredictionResult::select(self.gt.clone(), q))
    }
}

/// Same probability on every channel of every cell.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f32);

impl Constant {
    pub fn uniform() -> Self {
        Constant(0.5)
    }
}

impl Predictor for Constant {
    fn predict(&mut self, frame: &ObservationFrame, q: ClassId) -> Result<PredictionResult, PredictError> {
        check_query(q)?;
        Ok(PredictionResult::select(
            SemanticGrid::filled(frame.height(), frame.width(), self.0),
            q,
        ))
    }
}

/// Observed one-hot on explored cells, global class frequency elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct FrequencyPrior {
    freqs: ClassFrequencies,
}

impl FrequencyPrior {
    pub fn new(freqs: ClassFrequencies) -> Self {
        FrequencyPrior { freqs }
    }
}

impl Predictor for FrequencyPrior {
    fn predict(&mut self, frame: &ObservationFrame, q: ClassId) -> Result<PredictionResult, PredictError> {
        check_query(q)?;
        let (h, w) = (frame.height(), frame.width());
        let mut grid = SemanticGrid::zeros(h, w);
        for row in 0..h {
            for col in 0..w {
                let cell = Cell::new(row, col);
                if frame.explored.get(cell) {
                    grid.cell_mut(cell).copy_from_slice(frame.local_semantics.cell(cell));
                } else {
                    for (slot, f) in grid.cell_mut(cell).iter_mut().zip(self.freqs.0) {
                        *slot = f as f32;
                    }
                }
            }
        }
        Ok(PredictionResult::select(grid, q))
    }
}

trait Duplex: Read + Write + Send {}
impl<T: Read + Write + Send> Duplex for T {}

/// Child process speaking SSP1 over its stdin/stdout.
struct ChildPipe {
    child: Child,
    stdin: ChildStdin,
    stdout: ChildStdout,
}

impl Read for ChildPipe {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.stdout.read(buf)
    }
}

impl Write for ChildPipe {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.stdin.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.stdin.flush()
    }
}

impl Drop for ChildPipe {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Client for an out-of-process model. One request in flight at a time.
pub struct External {
    stream: Box<dyn Duplex>,
}

impl External {
    /// `tcp:HOST:PORT`, `unix:PATH` or `stdio:PROGRAM [ARGS...]`.
    pub fn connect(endpoint: &str) -> Result<Self, PredictError> {
        let fail = |reason: String| PredictError::Connect {
            endpoint: endpoint.to_string(),
            reason,
        };
        let stream: Box<dyn Duplex> = if let Some(addr) = endpoint.strip_prefix("tcp:") {
            let s = TcpStream::connect(addr).map_err(|e| fail(e.to_string()))?;
            s.set_nodelay(true).map_err(|e| fail(e.to_string()))?;
            Box::new(s)
        } else if let Some(path) = endpoint.strip_prefix("unix:") {
            #[cfg(unix)]
            {
                Box::new(std::os::unix::net::UnixStream::connect(path).map_err(|e| fail(e.to_string()))?)
            }
            #[cfg(not(unix))]
            {
                let _ = path;
                return Err(fail("unix sockets are not available on this platform".into()));
            }
        } else if let Some(cmd) = endpoint.strip_prefix("stdio:") {
            let mut parts = cmd.split_whitespace();
            let program = parts.next().ok_or_else(|| fail("empty command".into()))?;
            let mut child = Command::new(program)
                .args(parts)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .map_err(|e| fail(e.to_string()))?;
            let stdin = child.stdin.take().expect("piped");
            let stdout = child.stdout.take().expect("piped");
            Box::new(ChildPipe { child, stdin, stdout })
        } else {
            return Err(fail("expected tcp:, unix: or stdio: prefix".into()));
        };
        Ok(External { stream })
    }

    /// Wraps an already-connected stream.
    pub fn from_stream<S: Read + Write + Send + 'static>(stream: S) -> Self {
        External {
            stream: Box::new(stream),
        }
    }
}

impl Predictor for External {
    fn predict(&mut self, frame: &ObservationFrame, q: ClassId) -> Result<PredictionResult, PredictError> {
        check_query(q)?;
        protocol::write_message(&mut self.stream, &encode_request(frame, q))?;
        let reply = protocol::read_message(&mut self.stream, protocol::MSG_RESPONSE)?;
        let result = decode_response(&reply, q)?;
        check_dims(frame, result.global_probs.height(), result.global_probs.width())?;
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::{run_exploration, ExploreConfig};
    use crate::floorgen::tiny_two_room_plan;
    use crate::grid::BitMask;

    fn frame() -> ObservationFrame {
        run_exploration(&tiny_two_room_plan(), Cell::new(2, 2), &ExploreConfig::default())
            .unwrap()
            .remove(0)
    }

    #[test]
    fn oracle_returns_ground_truth() {
        let plan = tiny_two_room_plan();
        let mut oracle = Oracle::new(plan.labels.clone());
        let r = oracle.predict(&frame(), ClassId::BEDROOM).unwrap();
        assert_eq!(r.argmax(), plan.labels);
        for cell in plan.labels.cells() {
            let expected = (plan.labels.get(cell) == ClassId::BEDROOM) as u8 as f32;
            assert_eq!(r.area_prob.get(cell), expected);
        }
    }

    #[test]
    fn uniform_is_one_half() {
        let r = Constant::uniform().predict(&frame(), ClassId::KITCHEN).unwrap();
        assert!(r.global_probs.values().iter().all(|v| *v == 0.5));
        assert!(r.area_prob.values.iter().all(|v| *v == 0.5));
    }

    #[test]
    fn frequency_prior_fills_unexplored_cells() {
        let mut census = [0u64; NUM_CLASSES];
        census[ClassId::BEDROOM.index()] = 25;
        census[ClassId::WALL.index()] = 75;
        let freqs = ClassFrequencies::from_census(&census).unwrap();
        let mut f = frame();
        f.explored = BitMask::new(8, 8);
        f.local_semantics = SemanticGrid::zeros(8, 8);
        let r = FrequencyPrior::new(freqs).predict(&f, ClassId::BEDROOM).unwrap();
        assert!(r.area_prob.values.iter().all(|v| *v == 0.25));

        let observed = FrequencyPrior::new(freqs).predict(&frame(), ClassId::BEDROOM).unwrap();
        let at = Cell::new(2, 2);
        assert_eq!(observed.global_probs.cell(at), frame().local_semantics.cell(at));
    }

    #[test]
    fn bad_query_rejected() {
        let err = Constant::uniform().predict(&frame(), ClassId::OUTSIDE).unwrap_err();
        assert!(matches!(err, PredictError::BadQuery(9)));
    }

    #[test]
    fn unknown_endpoint_scheme() {
        assert!(matches!(
            External::connect("carrier-pigeon:home").err().unwrap(),
            PredictError::Connect { .. }
        ));
    }
}
