// Minimal viewer stub: reads the embedded story data and marks the page as
// hydrated. The full interactive viewer replaces this file.
(function () {
  var node = document.getElementById("story-data");
  if (!node) return;
  var story = JSON.parse(node.textContent);
  var main = document.getElementById("story");
  if (main) main.setAttribute("data-sections", String(story.sections.length));
})();
